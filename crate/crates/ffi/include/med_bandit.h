#ifndef MED_BANDIT_H
#define MED_BANDIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MedStatus {
  MED_STATUS_OK = 0,
  MED_STATUS_NULL_POINTER = 1,
  MED_STATUS_INVALID_ARGUMENT = 2,
  MED_STATUS_INVALID_CONFIG = 3,
  MED_STATUS_DOMAIN = 4,
  MED_STATUS_IO = 5,
  MED_STATUS_PANIC = 6,
} MedStatus;

/**
 * A validated finite distribution.
 */
typedef struct MedDistribution MedDistribution;

/**
 * A bandit episode that owns its environment and policy.
 */
typedef struct MedEpisode MedEpisode;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL after a success.
 * The pointer stays valid until the next call into this library on the same thread.
 */
const char *med_last_error(void);

/**
 * Frees a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed already.
 */
void med_string_free(char *s);

/**
 * Solves `D_min(F, mu)` for `F` given by `len` support points on `[-1, 0]`
 * and their probabilities, with `r` Newton iterations started at `nu0`.
 *
 * # Safety
 * `points` and `probs` must point to `len` readable doubles; the outputs must be writable.
 */
enum MedStatus med_dmin(const double *points,
                        const double *probs,
                        size_t len,
                        double mu,
                        uint32_t r,
                        double nu0,
                        double *out_value,
                        double *out_nu_star);

/**
 * # Safety
 * `points` and `probs` must point to `len` readable doubles; `out_handle` must be writable.
 */
enum MedStatus med_distribution_new(const double *points,
                                    const double *probs,
                                    size_t len,
                                    struct MedDistribution **out_handle);

/**
 * # Safety
 * `dist` must be a live handle; `out_mean` must be writable.
 */
enum MedStatus med_distribution_mean(const struct MedDistribution *dist, double *out_mean);

/**
 * As [`med_dmin`], for a distribution handle.
 *
 * # Safety
 * `dist` must be a live handle; the outputs must be writable.
 */
enum MedStatus med_distribution_dmin(const struct MedDistribution *dist,
                                     double mu,
                                     uint32_t r,
                                     double nu0,
                                     double *out_value,
                                     double *out_nu_star);

/**
 * # Safety
 * `dist` must be NULL or a live handle from [`med_distribution_new`].
 */
void med_distribution_free(struct MedDistribution *dist);

/**
 * Creates an episode for policy `policy_index` of a TOML experiment config,
 * seeded by `(master_seed, run_index, policy_index)` like the CLI runs.
 *
 * # Safety
 * `config_toml` must be a NUL-terminated string; `out_handle` must be writable.
 */
enum MedStatus med_episode_new(const char *config_toml,
                               size_t policy_index,
                               uint64_t master_seed,
                               uint64_t run_index,
                               struct MedEpisode **out_handle);

/**
 * Plays one round. Either output may be NULL.
 *
 * # Safety
 * `episode` must be a live handle; non-NULL outputs must be writable.
 */
enum MedStatus med_episode_step(struct MedEpisode *episode, size_t *out_arm, double *out_reward);

/**
 * Number of arms, or 0 for a NULL handle.
 *
 * # Safety
 * `episode` must be NULL or a live handle.
 */
size_t med_episode_arms(const struct MedEpisode *episode);

/**
 * Writes the pull counts of the first `min(len, arms)` arms.
 *
 * # Safety
 * `episode` must be a live handle; `out_counts` must hold `len` writable `uint64_t`.
 */
enum MedStatus med_episode_counts(const struct MedEpisode *episode,
                                  uint64_t *out_counts,
                                  size_t len);

/**
 * Pseudo-regret so far, from the exact arm means.
 *
 * # Safety
 * `episode` must be a live handle; `out_regret` must be writable.
 */
enum MedStatus med_episode_regret(const struct MedEpisode *episode, double *out_regret);

/**
 * # Safety
 * `episode` must be NULL or a live handle from [`med_episode_new`].
 */
void med_episode_free(struct MedEpisode *episode);

/**
 * Runs a whole TOML experiment and returns its CSV text in `*out_csv`
 * (free with [`med_string_free`]). `workers` of 0 is treated as 1.
 *
 * # Safety
 * `config_toml` must be a NUL-terminated string; `out_csv` must be writable.
 */
enum MedStatus med_experiment_run(const char *config_toml, size_t workers, char **out_csv);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MED_BANDIT_H */
