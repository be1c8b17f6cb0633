//! Ordered frame pipeline: a sequential reader feeds a worker pool, and a
//! sequential writer receives results strictly in input order. At most
//! `2 * threads` frames are in flight, so memory stays bounded on long
//! streams. Workers run pure per-frame functions, so the output does not
//! depend on the thread count.

use std::collections::BTreeMap;
use std::sync::mpsc::{channel, sync_channel};
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::frame::Frame;

/// Which side of the pipeline failed.
#[derive(Debug)]
pub enum PipelineError {
    Source(Error),
    Work { index: usize, error: Error },
    Sink(Error),
}

/// Run `work` over every frame from `source` and hand results to `sink` in
/// order. Returns the number of frames processed.
pub fn run_ordered<T, W, S>(
    source: impl Iterator<Item = Result<Frame>>,
    threads: usize,
    work: W,
    mut sink: S,
) -> std::result::Result<usize, PipelineError>
where
    T: Send,
    W: Fn(usize, Frame) -> Result<T> + Sync,
    S: FnMut(T) -> Result<()>,
{
    let threads = threads.max(1);
    if threads == 1 {
        let mut count = 0;
        for (index, frame) in source.enumerate() {
            let frame = frame.map_err(PipelineError::Source)?;
            let out = work(index, frame).map_err(|error| PipelineError::Work { index, error })?;
            sink(out).map_err(PipelineError::Sink)?;
            count += 1;
        }
        return Ok(count);
    }

    let window = 2 * threads;
    let (job_tx, job_rx) = sync_channel::<(usize, Frame)>(window);
    let job_rx = Mutex::new(job_rx);
    let (res_tx, res_rx) = channel::<(usize, Result<T>)>();
    std::thread::scope(|scope| {
        for _ in 0..threads {
            let res_tx = res_tx.clone();
            let (job_rx, work) = (&job_rx, &work);
            scope.spawn(move || loop {
                let job = job_rx.lock().unwrap_or_else(|e| e.into_inner()).recv();
                let Ok((index, frame)) = job else { break };
                if res_tx.send((index, work(index, frame))).is_err() {
                    break;
                }
            });
        }
        drop(res_tx);

        let mut pending: BTreeMap<usize, Result<T>> = BTreeMap::new();
        let (mut sent, mut written) = (0usize, 0usize);
        let mut source = source.fuse();
        let mut exhausted = false;
        // drop the job sender on every exit path so workers wind down
        let mut job_tx = Some(job_tx);
        let outcome = loop {
            while !exhausted && sent - written < window {
                match source.next() {
                    Some(Ok(frame)) => {
                        let tx = job_tx.as_ref().expect("sender lives until the source ends");
                        if tx.send((sent, frame)).is_err() {
                            break;
                        }
                        sent += 1;
                    }
                    Some(Err(e)) => {
                        // frames before the bad one are still written, in order
                        drop(job_tx.take());
                        while written < sent {
                            match drain_next(&res_rx, &mut pending, written) {
                                Ok(out) => {
                                    if let Err(e) = sink(out) {
                                        return Err(PipelineError::Sink(e));
                                    }
                                    written += 1;
                                }
                                Err(err) => return Err(err),
                            }
                        }
                        return Err(PipelineError::Source(e));
                    }
                    None => {
                        exhausted = true;
                        job_tx = None;
                    }
                }
            }
            if written == sent {
                if exhausted {
                    break Ok(written);
                }
                continue;
            }
            match drain_next(&res_rx, &mut pending, written) {
                Ok(out) => {
                    if let Err(e) = sink(out) {
                        break Err(PipelineError::Sink(e));
                    }
                    written += 1;
                }
                Err(err) => break Err(err),
            }
        };
        drop(job_tx);
        outcome
    })
}

/// Block until result `index` is available.
fn drain_next<T>(
    rx: &std::sync::mpsc::Receiver<(usize, Result<T>)>,
    pending: &mut BTreeMap<usize, Result<T>>,
    index: usize,
) -> std::result::Result<T, PipelineError> {
    loop {
        if let Some(r) = pending.remove(&index) {
            return r.map_err(|error| PipelineError::Work { index, error });
        }
        match rx.recv() {
            Ok((i, r)) => {
                pending.insert(i, r);
            }
            Err(_) => return Err(PipelineError::Work { index, error: Error::InvalidFrame("worker pool stopped early".into()) }),
        }
    }
}
