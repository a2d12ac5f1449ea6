#ifndef FLOWTRACK_H
#define FLOWTRACK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FtStatus {
  FT_STATUS_OK = 0,
  FT_STATUS_NULL_ARGUMENT = 1,
  FT_STATUS_INVALID_ARGUMENT = 2,
  FT_STATUS_PARSE = 3,
  FT_STATUS_MODEL_FORMAT = 4,
  FT_STATUS_DIMENSION_MISMATCH = 5,
  FT_STATUS_INVALID_INPUT = 6,
  FT_STATUS_IO = 7,
  FT_STATUS_INTERNAL = 8,
} FtStatus;

/**
 * A trained association model.
 */
typedef struct FtModel FtModel;

/**
 * Tracking output.
 */
typedef struct FtTracks FtTracks;

/**
 * Tracker costs. `v_det` and `v_link` lie in (0, 1), `c_in_out` > 0.
 */
typedef struct FtCostConfig {
  double v_det;
  double v_link;
  double c_in_out;
  uint32_t max_link_gap;
} FtCostConfig;

typedef struct FtEvalReport {
  double mota;
  double motp;
  size_t mostly_tracked;
  size_t mostly_lost;
  size_t gt_tracks;
  size_t id_switches;
  size_t false_positives;
  size_t misses;
  size_t matches;
  size_t gt_count;
} FtEvalReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *ft_last_error(void);

void ft_string_free(char *s);

struct FtCostConfig ft_cost_config_default(void);

double ft_detection_cost(double score, double v_det);

double ft_link_cost(double probability, double v_link);

/**
 * Loads a `gbm-v1` model file.
 */
enum FtStatus ft_model_read(const char *path, struct FtModel **out);

/**
 * Parses a model from `gbm-v1` text.
 */
enum FtStatus ft_model_from_string(const char *model_text, struct FtModel **out);

void ft_model_free(struct FtModel *model);

/**
 * Number of input features the model expects, or 0 for a null handle.
 */
size_t ft_model_feature_count(const struct FtModel *model);

/**
 * Match probability for one feature vector of length `len`.
 */
enum FtStatus ft_model_predict(const struct FtModel *model,
                               const double *features,
                               size_t len,
                               double *out);

/**
 * Tracks MOT detection text.
 *
 * With `model` set, pair probabilities come from the model and `score_text`
 * optionally supplies its external features. Without a model, `score_text`
 * is required and holds one probability per pair. `cfg` may be null for the
 * defaults.
 */
enum FtStatus ft_track(const char *detections_mot,
                       const char *score_text,
                       const struct FtModel *model,
                       const struct FtCostConfig *cfg,
                       struct FtTracks **out);

/**
 * Tracks with the distance-only baseline scorer of scale `tau` pixels.
 */
enum FtStatus ft_track_lp2d(const char *detections_mot,
                            double tau,
                            const struct FtCostConfig *cfg,
                            struct FtTracks **out);

void ft_tracks_free(struct FtTracks *tracks);

size_t ft_tracks_count(const struct FtTracks *tracks);

double ft_tracks_total_cost(const struct FtTracks *tracks);

/**
 * Renders the trajectories as a MOT results file. Free with
 * [`ft_string_free`].
 */
enum FtStatus ft_tracks_to_mot(const struct FtTracks *tracks, char **out);

/**
 * CLEAR MOT evaluation of MOT results text against ground truth text.
 */
enum FtStatus ft_evaluate(const char *gt_mot,
                          const char *results_mot,
                          double iou_threshold,
                          struct FtEvalReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FLOWTRACK_H */
