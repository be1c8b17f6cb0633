//! Compiles a small C program against the generated header and the static
//! library, then runs it.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "wavescrub.h"

int main(void) {
    enum { W = 64, H = 48 };
    static uint8_t rgb[W * H * 3], out_rgb[W * H * 3];
    for (size_t i = 0; i < sizeof rgb; i++) rgb[i] = (uint8_t)((i * 13) % 256);

    WsFrame *frame = NULL, *anon = NULL;
    WsAnonymizer *a = NULL;
    if (ws_frame_from_rgb8(rgb, W, H, &frame) != WS_STATUS_OK) return 10;
    if (ws_anonymizer_wtaa(WS_BASIS_CDF97, 4, 2.0, WS_COLOR_MODE_LUMA_CHROMA, &a) != WS_STATUS_OK) return 11;
    if (ws_anonymize(a, frame, &anon) != WS_STATUS_OK) return 12;
    if (ws_frame_to_rgb8(anon, out_rgb, sizeof out_rgb) != WS_STATUS_OK) return 13;

    double psnr = 0.0;
    if (ws_psnr(frame, anon, &psnr) != WS_STATUS_OK) return 14;

    WsAnonymizer *bad = NULL;
    if (ws_anonymizer_gaussian(-2.0, &bad) != WS_STATUS_INVALID_ARGUMENT) return 15;
    const char *msg = ws_last_error_message();
    if (msg == NULL || strstr(msg, "sigma") == NULL) return 16;

    printf("version=%s psnr=%.3f\n", ws_version(), psnr);
    ws_frame_free(anon);
    ws_frame_free(frame);
    ws_anonymizer_free(a);
    return 0;
}
"#;

fn target_dir() -> PathBuf {
    // <target>/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let crate_dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = target_dir().join("libwavescrub_ffi.a");
    assert!(lib.is_file(), "static library not found at {}", lib.display());
    let work = tempfile::tempdir().unwrap();
    let src = work.path().join("client.c");
    let exe = work.path().join("client");
    std::fs::write(&src, PROGRAM).unwrap();
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(&src)
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .expect("a C compiler is required for this test");
    assert!(status.success(), "compiling the C client failed");
    let out = Command::new(&exe).output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "client exited with {:?}: {stdout}", out.status.code());
    assert!(stdout.starts_with(&format!("version={} psnr=", env!("CARGO_PKG_VERSION"))), "{stdout}");
}
