#ifndef VOXVEIL_H
#define VOXVEIL_H

#include <stddef.h>
#include <stdint.h>

/**
 * Result codes shared by every function.
 */
typedef enum VvStatus {
  VV_STATUS_OK = 0,
  VV_STATUS_NULL_POINTER = 1,
  VV_STATUS_INVALID_ARGUMENT = 2,
  VV_STATUS_FORMAT = 3,
  VV_STATUS_IO = 4,
  VV_STATUS_VALIDATION = 5,
  VV_STATUS_NUMERICAL = 6,
  VV_STATUS_SAMPLING_EXHAUSTED = 7,
  VV_STATUS_UNDEFINED_BASELINE = 8,
  VV_STATUS_UNDEFINED_CORRELATION = 9,
  VV_STATUS_PANIC = 10,
} VvStatus;

/**
 * Audio buffer handle.
 */
typedef struct VvAudio VvAudio;

/**
 * Embedding pool handle.
 */
typedef struct VvPool VvPool;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *vv_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *vv_version(void);

/**
 * Copies `len` samples into a new audio handle.
 *
 * # Safety
 * `samples` must point to `len` readable doubles; `out` must be writable.
 */
enum VvStatus vv_audio_from_samples(const double *samples,
                                    size_t len,
                                    uint32_t sample_rate_hz,
                                    struct VvAudio **out);

/**
 * Reads a WAV file (16-bit PCM or 32-bit float, channels averaged).
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum VvStatus vv_audio_read_wav(const char *path, struct VvAudio **out);

/**
 * Writes 16-bit PCM mono; `clipped` (optional) receives the clipped sample count.
 *
 * # Safety
 * `audio` must be a live handle; `path` NUL-terminated; `clipped` NULL or writable.
 */
enum VvStatus vv_audio_write_wav(const struct VvAudio *audio, const char *path, size_t *clipped);

/**
 * Number of samples; 0 for NULL.
 *
 * # Safety
 * `audio` must be NULL or a live handle.
 */
size_t vv_audio_len(const struct VvAudio *audio);

/**
 * Sample rate in Hz; 0 for NULL.
 *
 * # Safety
 * `audio` must be NULL or a live handle.
 */
uint32_t vv_audio_sample_rate(const struct VvAudio *audio);

/**
 * Borrowed pointer to the samples, valid while the handle lives.
 *
 * # Safety
 * `audio` must be NULL or a live handle.
 */
const double *vv_audio_samples(const struct VvAudio *audio);

/**
 * # Safety
 * `audio` must be NULL or a handle not yet freed.
 */
void vv_audio_free(struct VvAudio *audio);

/**
 * McAdams anonymization. Pass NaN as `alpha` to draw it from the seed; the
 * value used is written to `alpha_used` when non-NULL.
 *
 * # Safety
 * `input` must be a live handle, ids NUL-terminated, `out` writable,
 * `alpha_used` NULL or writable.
 */
enum VvStatus vv_anonymize_mcadams(const struct VvAudio *input,
                                   const char *speaker_id,
                                   const char *utt_id,
                                   uint64_t seed,
                                   double alpha,
                                   struct VvAudio **out,
                                   double *alpha_used);

/**
 * Pitch-shift anonymization. Pass NaN as `semitones` to draw the shift from
 * the seed; the shift used is written to `semitones_used` when non-NULL.
 *
 * # Safety
 * As for [`vv_anonymize_mcadams`].
 */
enum VvStatus vv_anonymize_pitch_shift(const struct VvAudio *input,
                                       const char *speaker_id,
                                       const char *utt_id,
                                       uint64_t seed,
                                       double semitones,
                                       struct VvAudio **out,
                                       double *semitones_used);

/**
 * Loads a SAEB pool file.
 *
 * # Safety
 * `path` NUL-terminated; `out` writable.
 */
enum VvStatus vv_pool_load(const char *path, struct VvPool **out);

/**
 * # Safety
 * `pool` must be NULL or a live handle.
 */
size_t vv_pool_len(const struct VvPool *pool);

/**
 * # Safety
 * `pool` must be NULL or a live handle.
 */
size_t vv_pool_dim(const struct VvPool *pool);

/**
 * # Safety
 * `pool` must be NULL or a handle not yet freed.
 */
void vv_pool_free(struct VvPool *pool);

/**
 * Averages `m` random members of the `k` pool entries farthest from
 * `source` and writes the unit-length result to `out` (`dim` floats).
 *
 * # Safety
 * `pool` live; `source` and `out` point to `dim` floats; ids NUL-terminated.
 */
enum VvStatus vv_anonymize_embedding_pool(const struct VvPool *pool,
                                          const float *source,
                                          size_t dim,
                                          const char *speaker_id,
                                          const char *utt_id,
                                          uint64_t seed,
                                          size_t k,
                                          size_t m,
                                          float *out);

/**
 * Writes the 42-dimensional baseline embedding of `audio` into `out`, which
 * must hold `capacity` >= 42 floats. `dim` (optional) receives 42.
 *
 * # Safety
 * `audio` live; `out` writable for `capacity` floats; `dim` NULL or writable.
 */
enum VvStatus vv_baseline_embedding(const struct VvAudio *audio,
                                    float *out,
                                    size_t capacity,
                                    size_t *dim);

/**
 * # Safety
 * `a` and `b` point to `dim` floats; `out` writable.
 */
enum VvStatus vv_cosine_similarity(const float *a, const float *b, size_t dim, double *out);

/**
 * Equal error rate (fraction) of mated and non-mated score arrays.
 *
 * # Safety
 * Arrays readable for their lengths; `out` writable.
 */
enum VvStatus vv_compute_eer(const double *mated,
                             size_t n_mated,
                             const double *nonmated,
                             size_t n_nonmated,
                             double *out);

/**
 * # Safety
 * `x` and `y` readable for `n` doubles; `out` writable.
 */
enum VvStatus vv_pearson(const double *x, const double *y, size_t n, double *out);

/**
 * GVD in dB between two row-major `n` x `n` similarity matrices. Complete
 * collapse of the anonymized matrix yields `-INFINITY` with status OK.
 *
 * # Safety
 * Both matrices readable for `n * n` doubles; `out` writable.
 */
enum VvStatus vv_gvd(const double *original, const double *anonymized, size_t n, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VOXVEIL_H */
