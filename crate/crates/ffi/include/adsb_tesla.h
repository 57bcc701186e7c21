#ifndef ADSB_TESLA_H
#define ADSB_TESLA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum AtStatus {
  AT_STATUS_OK = 0,
  AT_STATUS_NULL_POINTER = 1,
  AT_STATUS_INVALID_ARGUMENT = 2,
  /**
   * A field does not fit its bit width.
   */
  AT_STATUS_WIDTH = 3,
  /**
   * Parity check failed and the frame could not be corrected.
   */
  AT_STATUS_INTEGRITY = 4,
  /**
   * The ME field does not carry a protocol payload.
   */
  AT_STATUS_UNKNOWN_PAYLOAD = 5,
  AT_STATUS_CHAIN_EXHAUSTED = 6,
  /**
   * Output buffer too small; nothing was written or consumed.
   */
  AT_STATUS_BUFFER_TOO_SMALL = 7,
  AT_STATUS_PANIC = 99,
} AtStatus;

typedef enum AtVerdictStatus {
  AT_VERDICT_STATUS_VALID = 0,
  AT_VERDICT_STATUS_INVALID = 1,
  AT_VERDICT_STATUS_DROPPED_UNSAFE = 2,
  AT_VERDICT_STATUS_EXPIRED_UNPAIRED = 3,
} AtVerdictStatus;

/**
 * Opaque key chain.
 */
typedef struct AtKeyChain AtKeyChain;

/**
 * Opaque multi-sender receiver with a queue of pending verdicts.
 */
typedef struct AtReceiver AtReceiver;

/**
 * Opaque sender.
 */
typedef struct AtSender AtSender;

typedef struct AtFrame {
  uint8_t df;
  uint8_t capability;
  uint32_t icao;
  uint64_t me;
  uint32_t parity;
} AtFrame;

typedef struct AtVerdict {
  uint32_t icao;
  uint64_t seq;
  uint64_t message;
  enum AtVerdictStatus status;
  uint64_t interval;
} AtVerdict;

typedef struct AtSummary {
  uint64_t valid;
  uint64_t invalid;
  uint64_t dropped_unsafe;
  uint64_t expired;
  uint64_t unverifiable;
  uint64_t corrupt;
  uint64_t non_protocol;
  uint64_t invalid_keys;
} AtSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL
 * terminated, truncated to `len`). Returns the full message length
 * without the terminator, or 0 when there is no error.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t at_last_error(char *buf, size_t len);

/**
 * CRC-24 over an 11-byte payload.
 *
 * # Safety
 * `payload` must point to 11 readable bytes; `out` must be writable.
 */
enum AtStatus at_crc24(const uint8_t *payload, uint32_t *out);

/**
 * Serializes a frame into 14 bytes, computing the parity.
 *
 * # Safety
 * `out` must point to 14 writable bytes.
 */
enum AtStatus at_encode_frame(uint8_t df,
                              uint8_t capability,
                              uint32_t icao,
                              uint64_t me,
                              uint8_t *out);

/**
 * Parses 14 bytes, correcting up to `max_correctable` bit errors.
 *
 * # Safety
 * `bytes` must point to 14 readable bytes; `out` must be writable;
 * `corrected` may be null.
 */
enum AtStatus at_decode_frame(const uint8_t *bytes,
                              uint32_t max_correctable,
                              struct AtFrame *out,
                              uint32_t *corrected);

/**
 * `F(key)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum AtStatus at_f(uint64_t key, uint64_t *out);

/**
 * `G(key)`, the MAC key derived from a chain key.
 *
 * # Safety
 * `out` must be writable.
 */
enum AtStatus at_g(uint64_t key, uint64_t *out);

/**
 * Truncated tag `HMAC(G(chain_key), message)`.
 *
 * # Safety
 * `message` must point to `len` readable bytes (or be null with `len` 0);
 * `out` must be writable.
 */
enum AtStatus at_mac50(uint64_t chain_key, const uint8_t *message, size_t len, uint64_t *out);

/**
 * Generates `K_0..=K_n` from a 32-byte seed.
 *
 * # Safety
 * `seed` must point to 32 readable bytes; `out` must be writable.
 */
enum AtStatus at_keychain_new(const uint8_t *seed, uint64_t n, struct AtKeyChain **out);

/**
 * # Safety
 * `chain` must be null or a handle from [`at_keychain_new`] not yet freed.
 */
void at_keychain_free(struct AtKeyChain *chain);

/**
 * Key at `index`; index 0 is the public anchor.
 *
 * # Safety
 * `chain` must be a live handle; `out` must be writable.
 */
enum AtStatus at_keychain_key(const struct AtKeyChain *chain, uint64_t index, uint64_t *out);

/**
 * Index of the last key, `n`.
 *
 * # Safety
 * `chain` must be null or a live handle.
 */
uint64_t at_keychain_len(const struct AtKeyChain *chain);

/**
 * True iff `F^v(candidate) == trusted`.
 *
 * # Safety
 * `out` must be writable.
 */
enum AtStatus at_verify_chain_link(uint64_t candidate,
                                   uint64_t trusted,
                                   uint64_t v,
                                   uint64_t max_depth,
                                   bool *out);

/**
 * Creates a sender with its own copy of `chain`.
 *
 * # Safety
 * `chain` must be a live handle; `out` must be writable.
 */
enum AtStatus at_sender_new(uint32_t icao,
                            const struct AtKeyChain *chain,
                            uint64_t d,
                            uint64_t interval_len,
                            uint32_t duplicates,
                            struct AtSender **out);

/**
 * # Safety
 * `sender` must be null or a handle from [`at_sender_new`] not yet freed.
 */
void at_sender_free(struct AtSender *sender);

/**
 * Frames one call can produce at most: Data, Mac and Key copies.
 *
 * # Safety
 * `sender` must be null or a live handle.
 */
size_t at_sender_max_frames(const struct AtSender *sender);

/**
 * Emits the frames for one 51-bit message into `out` (14 bytes each).
 * `cap_frames` must be at least [`at_sender_max_frames`].
 *
 * # Safety
 * `sender` must be a live handle; `out` must point to `cap_frames * 14`
 * writable bytes; `count` must be writable.
 */
enum AtStatus at_sender_emit(struct AtSender *sender,
                             uint64_t message,
                             uint8_t *out,
                             size_t cap_frames,
                             size_t *count);

/**
 * Ends the session, writing the final key disclosure frames.
 *
 * # Safety
 * As for [`at_sender_emit`].
 */
enum AtStatus at_sender_finish(struct AtSender *sender,
                               uint8_t *out,
                               size_t cap_frames,
                               size_t *count);

/**
 * Creates a receiver with default limits and the given schedule.
 *
 * # Safety
 * `out` must be writable.
 */
enum AtStatus at_receiver_new(uint64_t d, uint64_t interval_len, struct AtReceiver **out);

/**
 * # Safety
 * `rx` must be null or a handle from [`at_receiver_new`] not yet freed.
 */
void at_receiver_free(struct AtReceiver *rx);

/**
 * Installs the trusted key for `icao`.
 *
 * # Safety
 * `rx` must be a live handle.
 */
enum AtStatus at_receiver_provision(struct AtReceiver *rx,
                                    uint32_t icao,
                                    uint64_t anchor,
                                    uint64_t anchor_index);

/**
 * Feeds one 14-byte frame. Verdicts it produces are queued; `pending`
 * (may be null) receives the queue length.
 *
 * # Safety
 * `rx` must be a live handle; `bytes` must point to 14 readable bytes.
 */
enum AtStatus at_receiver_push(struct AtReceiver *rx, const uint8_t *bytes, size_t *pending);

/**
 * Ends the stream: every buffered message gets its verdict queued.
 *
 * # Safety
 * `rx` must be a live handle; `pending` may be null.
 */
enum AtStatus at_receiver_finish(struct AtReceiver *rx, size_t *pending);

/**
 * Pops the oldest queued verdict. Returns false when the queue is empty.
 *
 * # Safety
 * `rx` must be a live handle; `out` must be writable.
 */
bool at_receiver_next_verdict(struct AtReceiver *rx, struct AtVerdict *out);

/**
 * # Safety
 * `rx` must be a live handle; `out` must be writable.
 */
enum AtStatus at_receiver_summary(const struct AtReceiver *rx, struct AtSummary *out);

/**
 * Single-class collision probability; `period_s` is the time between
 * packets of one aircraft.
 *
 * # Safety
 * `out` must be writable.
 */
enum AtStatus at_p_collision_single(uint64_t n, double t_p_us, double period_s, double *out);

/**
 * Mode-S plus ADS-B collision probability at the standard packet lengths
 * and rate, both classes scaled by `rate_multiplier`.
 *
 * # Safety
 * `out` must be writable.
 */
enum AtStatus at_p_collision_combined(uint64_t n,
                                      double rate_multiplier,
                                      bool include_preamble,
                                      double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ADSB_TESLA_H */
