/*
 * ewm - egocentric world-model sandbox, public C API.
 *
 * The library wraps a C++ core behind opaque handles and status codes so it
 * can be consumed from C, FFI bindings, or the bundled CLI. All functions
 * returning ewm_status leave a human-readable message in ewm_last_error()
 * on failure. Handles are freed with their matching _free function.
 *
 * Poses and actions travel as 69 doubles:
 *   [root xyz, joint 0 euler xyz, ..., joint 21 euler xyz]
 * (world-frame meters for the root, radians for the joints).
 */
#ifndef EWM_H_
#define EWM_H_

#include <stddef.h>
#include <stdint.h>

#if defined _WIN32 || defined __CYGWIN__
#define EWM_API __declspec(dllexport)
#elif defined(__GNUC__) && __GNUC__ >= 4
#define EWM_API __attribute__((visibility("default")))
#else
#define EWM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ewm_status {
  EWM_OK = 0,
  EWM_ERROR_USAGE = 1,             /* invalid arguments or config keys */
  EWM_ERROR_DATA = 2,              /* malformed input data */
  EWM_ERROR_IO = 3,                /* file or network failure */
  EWM_ERROR_DEGENERATE_CAMERA = 4, /* coincident eyes / collinear neck */
  EWM_ERROR_CORRUPT_RECORD = 5,    /* checksum mismatch */
  EWM_ERROR_CLIP_REJECTED = 6,     /* validator unavailable or unparseable */
  EWM_ERROR_INTERNAL = 7
} ewm_status;

#define EWM_POSE_DIM 69
#define EWM_ACTION_DIM 69

typedef struct ewm_config ewm_config; /* opaque run configuration */
typedef struct ewm_model ewm_model;   /* opaque loaded checkpoint */

EWM_API const char* ewm_version(void);
EWM_API const char* ewm_build_stamp(void);

/* Message for the most recent failure on the calling thread. */
EWM_API const char* ewm_last_error(void);

/* Frees strings returned by ewm_config_dump / ewm_config_keys. */
EWM_API void ewm_string_free(char* s);

/* ---- configuration ------------------------------------------------- */

EWM_API ewm_status ewm_config_create_default(ewm_config** out);
EWM_API ewm_status ewm_config_load(const char* path, ewm_config** out);
/* Dotted override, e.g. ("planner.horizon", "8"); unknown keys fail. */
EWM_API ewm_status ewm_config_set(ewm_config* cfg, const char* dotted_key,
                                  const char* value);
EWM_API char* ewm_config_dump(const ewm_config* cfg); /* pretty JSON */
EWM_API char* ewm_config_keys(const ewm_config* cfg); /* key = default lines */
EWM_API void ewm_config_free(ewm_config* cfg);

/* ---- pipeline commands ---------------------------------------------- */

/* Writes a synthetic observation-action dataset. frames/seed of 0 take the
 * config values. */
EWM_API ewm_status ewm_run_gen_data(const ewm_config* cfg, const char* out_path,
                                    int episodes, int frames, uint64_t seed,
                                    int store_latents);

/* Segments, quality-filters, and optionally validator-checks clip
 * directories; writes the pass/fail manifest. min_duration < 0 and empty
 * strings take the config values. */
EWM_API ewm_status ewm_run_filter(const ewm_config* cfg, const char* in_dir,
                                  const char* out_manifest, int min_duration,
                                  const char* thresholds_path,
                                  const char* validator_url);

EWM_API ewm_status ewm_run_train(const ewm_config* cfg, const char* dataset_path,
                                 const char* checkpoint_out, const char* log_out,
                                 int iterations, uint64_t seed);

EWM_API ewm_status ewm_run_eval_rollout(const ewm_config* cfg,
                                        const char* checkpoint_path,
                                        const char* dataset_path,
                                        const char* report_out,
                                        const char* csv_out, int horizon);

/* replan_steps = 0 ranks once per episode; K > 0 runs a receding-horizon
 * loop that replans after executing the first action of each chosen
 * sequence, for K steps. */
EWM_API ewm_status ewm_run_plan(const ewm_config* cfg,
                                const char* checkpoint_path,
                                const char* report_out, int episodes, int runs,
                                int replan_steps, uint64_t seed);

EWM_API ewm_status ewm_run_report(const char* in_path, const char* out_csv);

/* ---- core operations ------------------------------------------------- */

/* Adds the action to the pose; joint angles clamp to +/- joint_limit_rad. */
EWM_API ewm_status ewm_apply_action(const double pose[EWM_POSE_DIM],
                                    const double action[EWM_ACTION_DIM],
                                    double joint_limit_rad,
                                    double out_pose[EWM_POSE_DIM]);

/* Componentwise pose difference; exact inverse of ewm_apply_action when no
 * clamping triggers. */
EWM_API ewm_status ewm_action_between(const double pose_a[EWM_POSE_DIM],
                                      const double pose_b[EWM_POSE_DIM],
                                      double out_action[EWM_ACTION_DIM]);

/* Encodes a P6 PPM image with the frozen encoder; latent_len must equal the
 * configured latent dimension. */
EWM_API ewm_status ewm_encode_ppm(const ewm_config* cfg, const char* ppm_path,
                                  double* out_latent, size_t latent_len);

/* Clip statistics over the PPM frames in a directory:
 * out_stats = {black_fraction_mean, white_fraction_mean, blur_median,
 * motion_median}. */
EWM_API ewm_status ewm_quality_stats_dir(const ewm_config* cfg,
                                         const char* clip_dir,
                                         double out_stats[4]);

/* Strict-threshold admission decision on a stats vector. */
EWM_API ewm_status ewm_passes_quality(const ewm_config* cfg,
                                      const double stats[4], int* out_pass);

/* ---- checkpoint handles ---------------------------------------------- */

EWM_API ewm_status ewm_model_load(const char* checkpoint_path, ewm_model** out);
EWM_API int ewm_model_latent_dim(const ewm_model* m);
EWM_API int ewm_model_context_len(const ewm_model* m);

/* Autoregressive latent rollout. context holds context_len latents of
 * latent_dim doubles; actions holds num_actions * 69 doubles; out_latents
 * receives num_actions * latent_dim doubles. use_ema selects the averaged
 * weights. */
EWM_API ewm_status ewm_model_rollout(const ewm_model* m, const double* context,
                                     const double* actions, int num_actions,
                                     int use_ema, double* out_latents);
EWM_API void ewm_model_free(ewm_model* m);

#ifdef __cplusplus
}
#endif

#endif /* EWM_H_ */
