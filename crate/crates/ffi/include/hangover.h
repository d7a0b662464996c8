#ifndef HANGOVER_H
#define HANGOVER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum HangoverStatus {
  HANGOVER_STATUS_OK = 0,
  HANGOVER_STATUS_NULL_POINTER = 1,
  HANGOVER_STATUS_INVALID_UTF8 = 2,
  HANGOVER_STATUS_INVALID_ARGUMENT = 3,
  HANGOVER_STATUS_PARSE = 4,
  HANGOVER_STATUS_IO = 5,
  HANGOVER_STATUS_CONFIG = 6,
  HANGOVER_STATUS_EMPTY_SAMPLE = 7,
  HANGOVER_STATUS_RANK_DEFICIENT = 8,
  HANGOVER_STATUS_NON_CONVERGENCE = 9,
  HANGOVER_STATUS_SEPARATION = 10,
  HANGOVER_STATUS_NO_TRAINING_DATA = 11,
  HANGOVER_STATUS_BUFFER_TOO_SMALL = 12,
  HANGOVER_STATUS_OTHER = 13,
  HANGOVER_STATUS_PANIC = 14,
} HangoverStatus;

typedef enum HangoverPolicy {
  HANGOVER_POLICY_MODEL = 0,
  HANGOVER_POLICY_MARKET_IMPLIED = 1,
} HangoverPolicy;

/**
 * Joined team-game rows for one league.
 */
typedef struct HangoverDataset HangoverDataset;

/**
 * A fitted regression.
 */
typedef struct HangoverModel HangoverModel;

typedef struct HangoverBacktestSummary {
  size_t seasons;
  size_t bets;
  int64_t final_profit_cents;
  int64_t worst_out_of_pocket_cents;
} HangoverBacktestSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *hangover_version(void);

/**
 * Stable snake-case kind of this thread's last error, or an empty string.
 */
const char *hangover_last_error_kind(void);

/**
 * Copies this thread's last error message into `buf`.
 * Returns `BufferTooSmall` with `*needed` set when `len` is short; the
 * stored error is never replaced by this call.
 */
enum HangoverStatus hangover_last_error_message(char *buf, size_t len, size_t *needed);

enum HangoverStatus hangover_implied_probability(int32_t american_odds, double *out_p);

/**
 * Proportional vig removal on two implied probabilities.
 */
enum HangoverStatus hangover_devig_pair(double p_home,
                                        double p_away,
                                        double *out_home,
                                        double *out_away);

/**
 * Expected value in cents of staking `stake_cents` at `american_odds`.
 */
enum HangoverStatus hangover_expected_value_cents(double p_model,
                                                  int32_t american_odds,
                                                  int64_t stake_cents,
                                                  int64_t *out_cents);

/**
 * Haversine distance in kilometres.
 */
enum HangoverStatus hangover_great_circle_km(double lat1,
                                             double lon1,
                                             double lat2,
                                             double lon2,
                                             double *out_km);

/**
 * Loads the five standard CSV files from `data_dir`.
 */
enum HangoverStatus hangover_dataset_load(const char *league_name,
                                          const char *data_dir,
                                          struct HangoverDataset **out_dataset);

/**
 * Generates a synthetic league with the generator defaults for `seed`.
 * When `out_dir` is non-null the CSV files are also written there.
 */
enum HangoverStatus hangover_synth_dataset(const char *league_name,
                                           uint64_t seed,
                                           double delta,
                                           const char *out_dir,
                                           struct HangoverDataset **out_dataset);

size_t hangover_dataset_row_count(const struct HangoverDataset *dataset);

void hangover_dataset_free(struct HangoverDataset *dataset);

/**
 * Fits a spec given as TOML text; null selects the league's first preset.
 */
enum HangoverStatus hangover_model_fit(const struct HangoverDataset *dataset,
                                       const char *spec_toml,
                                       struct HangoverModel **out_model);

size_t hangover_model_n_obs(const struct HangoverModel *model);

/**
 * Estimate, standard error and p-value of one term. Any out-pointer may be null.
 */
enum HangoverStatus hangover_model_term(const struct HangoverModel *model,
                                        const char *term,
                                        double *out_estimate,
                                        double *out_std_error,
                                        double *out_p_value);

/**
 * The fit as JSON.
 */
enum HangoverStatus hangover_model_json(const struct HangoverModel *model,
                                        char *buf,
                                        size_t len,
                                        size_t *needed);

/**
 * The fit rendered as a one-column monospace regression table.
 */
enum HangoverStatus hangover_model_table(const struct HangoverModel *model,
                                         char *buf,
                                         size_t len,
                                         size_t *needed);

void hangover_model_free(struct HangoverModel *model);

/**
 * Walk-forward backtest over all seasons; null spec picks the betting preset
 * for MLB and the discrete preset for NBA.
 */
enum HangoverStatus hangover_backtest(const struct HangoverDataset *dataset,
                                      const char *spec_toml,
                                      enum HangoverPolicy policy,
                                      struct HangoverBacktestSummary *out_summary);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HANGOVER_H */
