//! C ABI over the wavescrub library.
//!
//! Frames and anonymizers are opaque heap handles created and released by the
//! functions below. Every call returns a [`WsStatus`]; on failure a
//! description is available from [`ws_last_error_message`] on the same thread
//! until the next failing call. Panics never cross the boundary: they are
//! caught and reported as [`WsStatus::Panic`].
//!
//! Pixel buffers are interleaved 8-bit RGB, row-major, `width * height * 3`
//! bytes with no row padding.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use wavescrub::compare::{Anonymizer, WtaaParams};
use wavescrub::dwt::WaveletBasis;
use wavescrub::io::{read_ppm, write_ppm};
use wavescrub::metrics::{psnr, ssim};
use wavescrub::wtaa::ColorMode;
use wavescrub::{ColorSpace, Error, Frame, Plane};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WsStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullPointer = 1,
    /// A parameter was out of range (sigma, levels, factor, ...).
    InvalidArgument = 2,
    /// Input bytes could not be decoded.
    Parse = 3,
    /// The operation failed on valid input (e.g. frame too small for the settings).
    Processing = 4,
    /// A caller-provided buffer is too small.
    BufferTooSmall = 5,
    /// An internal panic was caught.
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WsBasis {
    Haar = 0,
    Db4 = 1,
    Cdf97 = 2,
}

impl From<WsBasis> for WaveletBasis {
    fn from(b: WsBasis) -> Self {
        match b {
            WsBasis::Haar => WaveletBasis::Haar,
            WsBasis::Db4 => WaveletBasis::Db4,
            WsBasis::Cdf97 => WaveletBasis::Cdf97,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WsColorMode {
    PerChannel = 0,
    LumaChroma = 1,
}

/// Opaque frame handle.
pub struct WsFrame {
    frame: Frame,
}

/// Opaque anonymizer handle.
pub struct WsAnonymizer {
    inner: Anonymizer,
}

struct Failure {
    status: WsStatus,
    message: String,
}

impl Failure {
    fn new(status: WsStatus, message: impl Into<String>) -> Self {
        Self { status, message: message.into() }
    }

    fn null(what: &str) -> Self {
        Self::new(WsStatus::NullPointer, format!("{what} is NULL"))
    }
}

fn parse_failure(e: Error) -> Failure {
    Failure::new(WsStatus::Parse, e.to_string())
}

fn argument_failure(e: Error) -> Failure {
    Failure::new(WsStatus::InvalidArgument, e.to_string())
}

fn processing_failure(e: Error) -> Failure {
    Failure::new(WsStatus::Processing, e.to_string())
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Run `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> WsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => WsStatus::Ok,
        Ok(Err(f)) => {
            set_last_error(&f.message);
            f.status
        }
        Err(_) => {
            set_last_error("internal panic");
            WsStatus::Panic
        }
    }
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Message describing the last failure on this thread, or NULL if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ws_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ws_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version contains NUL"),
    };
    VERSION.as_ptr()
}

/// Create a frame from interleaved RGB bytes.
///
/// # Safety
/// `rgb` must point to `width * height * 3` readable bytes and `out` to a
/// writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn ws_frame_from_rgb8(rgb: *const u8, width: usize, height: usize, out: *mut *mut WsFrame) -> WsStatus {
    guard(|| {
        if rgb.is_null() {
            return Err(Failure::null("rgb"));
        }
        if out.is_null() {
            return Err(Failure::null("out"));
        }
        let len = width
            .checked_mul(height)
            .and_then(|n| n.checked_mul(3))
            .filter(|&n| n > 0)
            .ok_or_else(|| Failure::new(WsStatus::InvalidArgument, format!("invalid dimensions {width}x{height}")))?;
        // SAFETY: the caller guarantees `len` readable bytes at `rgb`.
        let bytes = unsafe { std::slice::from_raw_parts(rgb, len) };
        let plane = |c: usize| Plane::from_fn(width, height, |x, y| bytes[(y * width + x) * 3 + c] as f64 / 255.0);
        let frame = Frame::from_planes(ColorSpace::Rgb, vec![plane(0), plane(1), plane(2)]).map_err(argument_failure)?;
        // SAFETY: `out` is non-null and writable per the contract.
        unsafe { *out = boxed(WsFrame { frame }) };
        Ok(())
    })
}

/// Copy a frame out as interleaved RGB bytes (rounded, clamped to 0..=255).
///
/// # Safety
/// `frame` must be a live handle and `rgb` must point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn ws_frame_to_rgb8(frame: *const WsFrame, rgb: *mut u8, len: usize) -> WsStatus {
    guard(|| {
        // SAFETY: the caller passes a live handle or NULL.
        let f = unsafe { frame.as_ref() }.ok_or_else(|| Failure::null("frame"))?;
        if rgb.is_null() {
            return Err(Failure::null("rgb"));
        }
        let rgb_frame = match f.frame.colorspace() {
            ColorSpace::Rgb => f.frame.clone(),
            ColorSpace::YCbCr => wavescrub::frame::ycbcr_to_rgb(&f.frame).map_err(processing_failure)?,
            ColorSpace::Gray => {
                let g = f.frame.channel(0).clone();
                Frame::from_planes(ColorSpace::Rgb, vec![g.clone(), g.clone(), g]).map_err(processing_failure)?
            }
        };
        let need = rgb_frame.pixel_count() * 3;
        if len < need {
            return Err(Failure::new(WsStatus::BufferTooSmall, format!("buffer holds {len} bytes, frame needs {need}")));
        }
        // SAFETY: `len >= need` writable bytes per the contract.
        let out = unsafe { std::slice::from_raw_parts_mut(rgb, need) };
        for (c, plane) in rgb_frame.channels().iter().enumerate() {
            for (i, &v) in plane.data().iter().enumerate() {
                out[i * 3 + c] = (v.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8;
            }
        }
        Ok(())
    })
}

/// Frame width in pixels, or 0 for NULL.
///
/// # Safety
/// `frame` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ws_frame_width(frame: *const WsFrame) -> usize {
    // SAFETY: NULL or live handle per the contract.
    unsafe { frame.as_ref() }.map_or(0, |f| f.frame.width())
}

/// Frame height in pixels, or 0 for NULL.
///
/// # Safety
/// `frame` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ws_frame_height(frame: *const WsFrame) -> usize {
    // SAFETY: NULL or live handle per the contract.
    unsafe { frame.as_ref() }.map_or(0, |f| f.frame.height())
}

/// Release a frame. NULL is ignored.
///
/// # Safety
/// `frame` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ws_frame_free(frame: *mut WsFrame) {
    if !frame.is_null() {
        // SAFETY: the handle came from `Box::into_raw` and is freed once.
        drop(unsafe { Box::from_raw(frame) });
    }
}

/// Decode one binary PPM (P6, maxval 255) image.
///
/// # Safety
/// `bytes` must point to `len` readable bytes and `out` to a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn ws_frame_read_ppm(bytes: *const u8, len: usize, out: *mut *mut WsFrame) -> WsStatus {
    guard(|| {
        if bytes.is_null() {
            return Err(Failure::null("bytes"));
        }
        if out.is_null() {
            return Err(Failure::null("out"));
        }
        // SAFETY: `len` readable bytes per the contract.
        let data = unsafe { std::slice::from_raw_parts(bytes, len) };
        let frame = read_ppm(data).map_err(parse_failure)?;
        // SAFETY: `out` is non-null and writable.
        unsafe { *out = boxed(WsFrame { frame }) };
        Ok(())
    })
}

/// Encode a frame as binary PPM. The buffer is owned by the library and must
/// be released with [`ws_bytes_free`].
///
/// # Safety
/// `frame` must be a live handle; `out` and `out_len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ws_frame_write_ppm(frame: *const WsFrame, out: *mut *mut u8, out_len: *mut usize) -> WsStatus {
    guard(|| {
        // SAFETY: NULL or live handle.
        let f = unsafe { frame.as_ref() }.ok_or_else(|| Failure::null("frame"))?;
        if out.is_null() || out_len.is_null() {
            return Err(Failure::null("out"));
        }
        let bytes = write_ppm(&f.frame).map_err(processing_failure)?.into_boxed_slice();
        let len = bytes.len();
        // SAFETY: both pointers are non-null and writable.
        unsafe {
            *out_len = len;
            *out = Box::into_raw(bytes) as *mut u8;
        }
        Ok(())
    })
}

/// Release a buffer returned by [`ws_frame_write_ppm`]. NULL is ignored.
///
/// # Safety
/// `bytes` and `len` must be exactly what the library returned, freed once.
#[no_mangle]
pub unsafe extern "C" fn ws_bytes_free(bytes: *mut u8, len: usize) {
    if !bytes.is_null() {
        // SAFETY: reconstructs the boxed slice handed out by `ws_frame_write_ppm`.
        drop(unsafe { Box::from_raw(ptr::slice_from_raw_parts_mut(bytes, len)) });
    }
}

fn new_anonymizer(made: wavescrub::Result<Anonymizer>, out: *mut *mut WsAnonymizer) -> WsStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::null("out"));
        }
        let inner = made.map_err(argument_failure)?;
        // SAFETY: `out` is non-null; the public wrappers require it writable.
        unsafe { *out = boxed(WsAnonymizer { inner }) };
        Ok(())
    })
}

/// Wavelet anonymizer destroying the `destroy_finest` finest of `levels`
/// levels (fractional values attenuate the next level).
///
/// # Safety
/// `out` must be a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn ws_anonymizer_wtaa(
    basis: WsBasis,
    levels: u32,
    destroy_finest: f64,
    color_mode: WsColorMode,
    out: *mut *mut WsAnonymizer,
) -> WsStatus {
    let color_mode = match color_mode {
        WsColorMode::PerChannel => ColorMode::PerChannel,
        WsColorMode::LumaChroma => ColorMode::LumaChroma,
    };
    let params = WtaaParams { basis: basis.into(), levels: levels as usize, destroy_finest, color_mode };
    new_anonymizer(Anonymizer::wtaa(params), out)
}

/// Gaussian blur baseline.
///
/// # Safety
/// `out` must be a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn ws_anonymizer_gaussian(sigma: f64, out: *mut *mut WsAnonymizer) -> WsStatus {
    new_anonymizer(Anonymizer::gaussian(sigma), out)
}

/// Block-mean downsampling baseline.
///
/// # Safety
/// `out` must be a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn ws_anonymizer_downsample(factor: u32, out: *mut *mut WsAnonymizer) -> WsStatus {
    new_anonymizer(Anonymizer::downsample(factor as usize), out)
}

/// Superpixel (SLIC) baseline.
///
/// # Safety
/// `out` must be a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn ws_anonymizer_superpixel(segments: u32, compactness: f64, out: *mut *mut WsAnonymizer) -> WsStatus {
    new_anonymizer(Anonymizer::superpixel(segments as usize, compactness), out)
}

/// Release an anonymizer. NULL is ignored.
///
/// # Safety
/// `a` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ws_anonymizer_free(a: *mut WsAnonymizer) {
    if !a.is_null() {
        // SAFETY: the handle came from `Box::into_raw` and is freed once.
        drop(unsafe { Box::from_raw(a) });
    }
}

/// Anonymize `input` into a new frame handle. Handles may be shared across
/// threads for concurrent read-only calls.
///
/// # Safety
/// `a` and `input` must be live handles; `out` must be a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn ws_anonymize(a: *const WsAnonymizer, input: *const WsFrame, out: *mut *mut WsFrame) -> WsStatus {
    guard(|| {
        // SAFETY: NULL or live handles per the contract.
        let a = unsafe { a.as_ref() }.ok_or_else(|| Failure::null("anonymizer"))?;
        // SAFETY: as above.
        let f = unsafe { input.as_ref() }.ok_or_else(|| Failure::null("input"))?;
        if out.is_null() {
            return Err(Failure::null("out"));
        }
        let frame = a.inner.apply(&f.frame).map_err(processing_failure)?;
        // SAFETY: `out` is non-null and writable.
        unsafe { *out = boxed(WsFrame { frame }) };
        Ok(())
    })
}

unsafe fn metric(
    a: *const WsFrame,
    b: *const WsFrame,
    out: *mut f64,
    f: fn(&Frame, &Frame) -> wavescrub::Result<f64>,
) -> WsStatus {
    guard(|| {
        // SAFETY: NULL or live handles per the public contracts.
        let (a, b) = unsafe { (a.as_ref(), b.as_ref()) };
        let (a, b) = a.zip(b).ok_or_else(|| Failure::null("frame"))?;
        if out.is_null() {
            return Err(Failure::null("out"));
        }
        let v = f(&a.frame, &b.frame).map_err(processing_failure)?;
        // SAFETY: `out` is non-null and writable.
        unsafe { *out = v };
        Ok(())
    })
}

/// PSNR in dB between two frames of equal size (capped at 99).
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ws_psnr(a: *const WsFrame, b: *const WsFrame, out: *mut f64) -> WsStatus {
    // SAFETY: forwarded contract.
    unsafe { metric(a, b, out, psnr) }
}

/// Mean SSIM over luma between two frames of equal size (at least 11x11).
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ws_ssim(a: *const WsFrame, b: *const WsFrame, out: *mut f64) -> WsStatus {
    // SAFETY: forwarded contract.
    unsafe { metric(a, b, out, ssim) }
}
