#ifndef PLANTRES_PLANTRES_H
#define PLANTRES_PLANTRES_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(PLANTRES_BUILDING)
#define PLANTRES_API __declspec(dllexport)
#else
#define PLANTRES_API __declspec(dllimport)
#endif
#else
#define PLANTRES_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum plantres_status {
  PLANTRES_OK = 0,
  PLANTRES_E_INVALID_ARGUMENT = 1,
  PLANTRES_E_PARSE = 2,
  PLANTRES_E_SCHEMA = 3,
  PLANTRES_E_INVALID_BOX = 4,
  PLANTRES_E_RANGE = 5,
  PLANTRES_E_UNIQUENESS = 6,
  PLANTRES_E_DANGLING_REFERENCE = 7,
  PLANTRES_E_UNDEFINED = 8,
  PLANTRES_E_DEGENERATE = 9,
  PLANTRES_E_SIZE = 10,
  PLANTRES_E_IO = 11,
  PLANTRES_E_CONFIG = 12,
  PLANTRES_E_INTERNAL = 99
} plantres_status;

typedef struct plantres_dataset plantres_dataset;
typedef struct plantres_predictions plantres_predictions;
typedef struct plantres_report plantres_report;
typedef struct plantres_experiment plantres_experiment;

/* Message of the last failing call on this thread; "" after a success. */
PLANTRES_API const char* plantres_last_error(void);
PLANTRES_API const char* plantres_status_name(plantres_status status);
PLANTRES_API const char* plantres_version(void);

/* Strings returned through char** out-parameters are owned by the caller. */
PLANTRES_API void plantres_string_free(char* s);

/* ---- parameters ------------------------------------------------------ */

typedef struct plantres_synth_params {
  int rows;
  int plants_per_row;
  double row_spacing_cm;
  double plant_spacing_cm;
  double gsd_cm;
  double mean_plant_diameter_px;
  double jitter_frac;
  double soil_texture_scale;
  int shadow;
  uint64_t seed;
  int canvas_width_px;
  int canvas_height_px;
} plantres_synth_params;

typedef struct plantres_degrade_params {
  double gaussian_sigma;
  int gaussian_window;
  int motion_kernel;
  double motion_angle_deg;
  int decimation_factor;
} plantres_degrade_params;

typedef enum plantres_threshold_mode {
  PLANTRES_THRESHOLD_OTSU = 0,
  PLANTRES_THRESHOLD_FIXED = 1
} plantres_threshold_mode;

typedef struct plantres_detector_config {
  plantres_threshold_mode threshold_mode;
  double fixed_threshold;
  double otsu_floor;
  double min_area_px;
  double max_area_px;
  int morph_open_radius;
} plantres_detector_config;

typedef struct plantres_eval_config {
  double iou_threshold;
  double confidence_threshold;
  int recall_points;
  const double* bin_edges; /* borrowed for the duration of a call */
  size_t n_bin_edges;
} plantres_eval_config;

PLANTRES_API plantres_synth_params plantres_synth_params_default(void);
PLANTRES_API plantres_degrade_params plantres_degrade_params_default(void);
PLANTRES_API plantres_detector_config plantres_detector_config_default(void);
PLANTRES_API plantres_eval_config plantres_eval_config_default(void);

/* JSON readers: omitted keys keep defaults, unknown keys fail with
 * PLANTRES_E_CONFIG. */
PLANTRES_API plantres_status plantres_degrade_params_from_json(const char* json,
                                                               plantres_degrade_params* out);
PLANTRES_API plantres_status plantres_detector_config_from_json(const char* json,
                                                                plantres_detector_config* out);

/* ---- datasets -------------------------------------------------------- */

PLANTRES_API plantres_status plantres_dataset_load(const char* manifest_path, int workers,
                                                   plantres_dataset** out);

/* Synthesizes n_plots fields with seeds params->seed + i. */
PLANTRES_API plantres_status plantres_dataset_synthesize(const plantres_synth_params* params,
                                                         int n_plots, const char* role,
                                                         const char* name, int workers,
                                                         plantres_dataset** out);

/* Synthesizes from a {"name", "role", "n_plots", "params"} JSON document.
 * A non-null seed replaces params.seed. */
PLANTRES_API plantres_status plantres_dataset_synthesize_json(const char* json,
                                                              const uint64_t* seed, int workers,
                                                              plantres_dataset** out);

/* Writes images/, annotations/ and manifest.json under dir. */
PLANTRES_API plantres_status plantres_dataset_write(plantres_dataset* ds, const char* dir,
                                                    int workers);
PLANTRES_API size_t plantres_dataset_image_count(const plantres_dataset* ds);
PLANTRES_API size_t plantres_dataset_box_count(const plantres_dataset* ds);
PLANTRES_API void plantres_dataset_free(plantres_dataset* ds);

PLANTRES_API plantres_status plantres_dataset_degrade(const plantres_dataset* ds,
                                                      const plantres_degrade_params* params,
                                                      const char* target_role, int workers,
                                                      plantres_dataset** out);
PLANTRES_API plantres_status plantres_dataset_bicubic(const plantres_dataset* ds, double factor,
                                                      const char* target_role, int workers,
                                                      plantres_dataset** out);
/* Pairs every image with <directory>/<image_id>.{png,jpg,jpeg}. */
PLANTRES_API plantres_status plantres_dataset_external(const plantres_dataset* ds,
                                                       const char* directory, double factor,
                                                       const char* target_role, int workers,
                                                       plantres_dataset** out);

/* n square patches of side `size` per image. */
PLANTRES_API plantres_status plantres_dataset_patches(const plantres_dataset* ds, int size, int n,
                                                      uint64_t seed, plantres_dataset** out);

/* Writes a rank,dataset,role,mean_variance,distance CSV ranking the
 * candidates by closeness to the native mean image variance. */
PLANTRES_API plantres_status plantres_variance_compare(const plantres_dataset* native,
                                                       const plantres_dataset* const* candidates,
                                                       size_t n_candidates, char** csv_out);

/* ---- predictions ----------------------------------------------------- */

PLANTRES_API plantres_status plantres_detect(const plantres_dataset* ds,
                                             const plantres_detector_config* config, int workers,
                                             plantres_predictions** out);
PLANTRES_API plantres_status plantres_predictions_load(const char* path,
                                                       plantres_predictions** out);
PLANTRES_API plantres_status plantres_predictions_save(const plantres_predictions* preds,
                                                       const char* path);
PLANTRES_API size_t plantres_predictions_count(const plantres_predictions* preds);
PLANTRES_API void plantres_predictions_free(plantres_predictions* preds);

/* ---- evaluation ------------------------------------------------------ */

typedef struct plantres_metrics {
  size_t n_images;
  size_t n_gt;
  double ap;
  double accuracy;
  double rrmse;
  size_t tp;
  size_t fp;
  size_t fn;
} plantres_metrics;

PLANTRES_API plantres_status plantres_evaluate(const plantres_dataset* ds,
                                               const plantres_predictions* preds,
                                               const plantres_eval_config* config, int workers,
                                               plantres_report** out);
/* Same, with the config given as JSON ("" or null for defaults). */
PLANTRES_API plantres_status plantres_evaluate_json(const plantres_dataset* ds,
                                                    const plantres_predictions* preds,
                                                    const char* config_json, int workers,
                                                    plantres_report** out);
PLANTRES_API plantres_status plantres_report_metrics(const plantres_report* report,
                                                     plantres_metrics* out);
/* Writes metrics.csv, pr_curve.csv and overdetection.csv under dir. */
PLANTRES_API plantres_status plantres_report_write(const plantres_report* report,
                                                   const char* dir);
PLANTRES_API void plantres_report_free(plantres_report* report);

/* ---- experiments ----------------------------------------------------- */

/* Runs a full experiment config; output_dir overrides the config's when
 * non-null. */
PLANTRES_API plantres_status plantres_experiment_run(const char* config_path,
                                                     const char* output_dir, int workers,
                                                     plantres_experiment** out);
/* Borrowed; valid until the experiment is freed. */
PLANTRES_API const char* plantres_experiment_report_csv(const plantres_experiment* exp);
PLANTRES_API const char* plantres_experiment_output_dir(const plantres_experiment* exp);
PLANTRES_API size_t plantres_experiment_cell_count(const plantres_experiment* exp);
PLANTRES_API void plantres_experiment_free(plantres_experiment* exp);

#ifdef __cplusplus
}
#endif

#endif /* PLANTRES_PLANTRES_H */
