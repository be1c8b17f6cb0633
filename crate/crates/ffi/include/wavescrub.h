#ifndef WAVESCRUB_H
#define WAVESCRUB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result of every fallible call.
 */
typedef enum WsStatus {
  WS_STATUS_OK = 0,
  /*
   A required pointer argument was NULL.
   */
  WS_STATUS_NULL_POINTER = 1,
  /*
   A parameter was out of range (sigma, levels, factor, ...).
   */
  WS_STATUS_INVALID_ARGUMENT = 2,
  /*
   Input bytes could not be decoded.
   */
  WS_STATUS_PARSE = 3,
  /*
   The operation failed on valid input (e.g. frame too small for the settings).
   */
  WS_STATUS_PROCESSING = 4,
  /*
   A caller-provided buffer is too small.
   */
  WS_STATUS_BUFFER_TOO_SMALL = 5,
  /*
   An internal panic was caught.
   */
  WS_STATUS_PANIC = 6,
} WsStatus;

typedef enum WsBasis {
  WS_BASIS_HAAR = 0,
  WS_BASIS_DB4 = 1,
  WS_BASIS_CDF97 = 2,
} WsBasis;

typedef enum WsColorMode {
  WS_COLOR_MODE_PER_CHANNEL = 0,
  WS_COLOR_MODE_LUMA_CHROMA = 1,
} WsColorMode;

/*
 Opaque anonymizer handle.
 */
typedef struct WsAnonymizer WsAnonymizer;

/*
 Opaque frame handle.
 */
typedef struct WsFrame WsFrame;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message describing the last failure on this thread, or NULL if none.
 The pointer stays valid until the next failing call on the same thread.
 */
const char *ws_last_error_message(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *ws_version(void);

/*
 Create a frame from interleaved RGB bytes.

 # Safety
 `rgb` must point to `width * height * 3` readable bytes and `out` to a
 writable handle slot.
 */
enum WsStatus ws_frame_from_rgb8(const uint8_t *rgb,
                                 size_t width,
                                 size_t height,
                                 struct WsFrame **out);

/*
 Copy a frame out as interleaved RGB bytes (rounded, clamped to 0..=255).

 # Safety
 `frame` must be a live handle and `rgb` must point to `len` writable bytes.
 */
enum WsStatus ws_frame_to_rgb8(const struct WsFrame *frame, uint8_t *rgb, size_t len);

/*
 Frame width in pixels, or 0 for NULL.

 # Safety
 `frame` must be NULL or a live handle.
 */
size_t ws_frame_width(const struct WsFrame *frame);

/*
 Frame height in pixels, or 0 for NULL.

 # Safety
 `frame` must be NULL or a live handle.
 */
size_t ws_frame_height(const struct WsFrame *frame);

/*
 Release a frame. NULL is ignored.

 # Safety
 `frame` must be NULL or a handle not yet freed.
 */
void ws_frame_free(struct WsFrame *frame);

/*
 Decode one binary PPM (P6, maxval 255) image.

 # Safety
 `bytes` must point to `len` readable bytes and `out` to a writable handle slot.
 */
enum WsStatus ws_frame_read_ppm(const uint8_t *bytes, size_t len, struct WsFrame **out);

/*
 Encode a frame as binary PPM. The buffer is owned by the library and must
 be released with [`ws_bytes_free`].

 # Safety
 `frame` must be a live handle; `out` and `out_len` must be writable.
 */
enum WsStatus ws_frame_write_ppm(const struct WsFrame *frame, uint8_t **out, size_t *out_len);

/*
 Release a buffer returned by [`ws_frame_write_ppm`]. NULL is ignored.

 # Safety
 `bytes` and `len` must be exactly what the library returned, freed once.
 */
void ws_bytes_free(uint8_t *bytes, size_t len);

/*
 Wavelet anonymizer destroying the `destroy_finest` finest of `levels`
 levels (fractional values attenuate the next level).

 # Safety
 `out` must be a writable handle slot.
 */
enum WsStatus ws_anonymizer_wtaa(enum WsBasis basis,
                                 uint32_t levels,
                                 double destroy_finest,
                                 enum WsColorMode color_mode,
                                 struct WsAnonymizer **out);

/*
 Gaussian blur baseline.

 # Safety
 `out` must be a writable handle slot.
 */
enum WsStatus ws_anonymizer_gaussian(double sigma, struct WsAnonymizer **out);

/*
 Block-mean downsampling baseline.

 # Safety
 `out` must be a writable handle slot.
 */
enum WsStatus ws_anonymizer_downsample(uint32_t factor, struct WsAnonymizer **out);

/*
 Superpixel (SLIC) baseline.

 # Safety
 `out` must be a writable handle slot.
 */
enum WsStatus ws_anonymizer_superpixel(uint32_t segments,
                                       double compactness,
                                       struct WsAnonymizer **out);

/*
 Release an anonymizer. NULL is ignored.

 # Safety
 `a` must be NULL or a handle not yet freed.
 */
void ws_anonymizer_free(struct WsAnonymizer *a);

/*
 Anonymize `input` into a new frame handle. Handles may be shared across
 threads for concurrent read-only calls.

 # Safety
 `a` and `input` must be live handles; `out` must be a writable handle slot.
 */
enum WsStatus ws_anonymize(const struct WsAnonymizer *a,
                           const struct WsFrame *input,
                           struct WsFrame **out);

/*
 PSNR in dB between two frames of equal size (capped at 99).

 # Safety
 `a` and `b` must be live handles; `out` must be writable.
 */
enum WsStatus ws_psnr(const struct WsFrame *a, const struct WsFrame *b, double *out);

/*
 Mean SSIM over luma between two frames of equal size (at least 11x11).

 # Safety
 `a` and `b` must be live handles; `out` must be writable.
 */
enum WsStatus ws_ssim(const struct WsFrame *a, const struct WsFrame *b, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WAVESCRUB_H */
