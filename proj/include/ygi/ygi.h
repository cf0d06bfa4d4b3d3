#ifndef YGI_YGI_H
#define YGI_YGI_H

/* C interface to the ghost-imaging library. Every call returns a ygi_status;
 * on failure ygi_last_error() describes the most recent error on the calling
 * thread. Objects returned through out-parameters are owned by the caller and
 * released with the matching *_free function. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define YGI_API __declspec(dllexport)
#else
#define YGI_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ygi_status {
    YGI_OK = 0,
    YGI_ERR_CONFIG = 1,
    YGI_ERR_IO = 2,
    YGI_ERR_FORMAT = 3,
    YGI_ERR_CORRUPT = 4,
    YGI_ERR_NUMERIC = 5,
    YGI_ERR_SHAPE = 6,
    YGI_ERR_DEGENERATE = 7,
    YGI_ERR_ARGUMENT = 8,
    YGI_ERR_INTERNAL = 9
} ygi_status;

typedef enum ygi_mode { YGI_MODE_STATIC = 0, YGI_MODE_DYNAMIC = 1 } ygi_mode;

YGI_API const char* ygi_last_error(void);
YGI_API const char* ygi_status_name(ygi_status status);
YGI_API const char* ygi_version(void);
YGI_API void ygi_string_free(char* text);

/* ---- optics ------------------------------------------------------------ */

typedef struct ygi_optics {
    double wavelength;
    double d1;
    double d2;
    double source_diameter;
    double sim_pitch;
    double detector_pitch;
    int32_t sim_grid_n;
    int32_t detector_n;
    int32_t pad_factor;
} ygi_optics;

YGI_API void ygi_optics_defaults(ygi_optics* optics);
YGI_API ygi_status ygi_optics_validate(const ygi_optics* optics);
/* lambda (d1 + d2) / source_diameter in detector pixels. */
YGI_API ygi_status ygi_expected_grain(const ygi_optics* optics, double* pixels);

/* ---- images ------------------------------------------------------------ */

typedef struct ygi_image ygi_image;

/* values may be NULL for a zero image. */
YGI_API ygi_status ygi_image_create(int32_t n, double pitch, const double* values, ygi_image** out);
YGI_API void ygi_image_free(ygi_image* image);
YGI_API int32_t ygi_image_size(const ygi_image* image);
YGI_API double ygi_image_pitch(const ygi_image* image);
YGI_API const double* ygi_image_data(const ygi_image* image);
/* 8-bit PGM; min-max scaled when lo >= hi, otherwise clipped to [lo, hi].
 * The range actually used is written back through used_lo / used_hi (may be NULL). */
YGI_API ygi_status ygi_image_write_pgm(const ygi_image* image, const char* path, double lo, double hi,
                                       double* used_lo, double* used_hi);
/* Square grid of tiles, each min-max scaled, one background pixel apart. */
YGI_API ygi_status ygi_image_mosaic(const ygi_image* const* tiles, size_t count, int32_t columns, ygi_image** out);

/* ---- speckle simulation ------------------------------------------------ */

typedef struct ygi_pair ygi_pair;

YGI_API ygi_status ygi_simulate_pair(const ygi_optics* optics, const ygi_image* sample, uint64_t seed,
                                     ygi_pair** out);
YGI_API ygi_status ygi_simulate_reference(const ygi_optics* optics, uint64_t seed, ygi_image** out);
YGI_API void ygi_pair_free(ygi_pair* pair);
/* Borrowed views, valid while the pair lives. */
YGI_API const ygi_image* ygi_pair_reference(const ygi_pair* pair);
YGI_API const ygi_image* ygi_pair_test(const ygi_pair* pair);
YGI_API uint64_t ygi_pair_seed(const ygi_pair* pair);

/* Mean g2 map over `count` frames plus its peak and full width at half height. */
YGI_API ygi_status ygi_autocorrelation(const ygi_image* const* frames, size_t count, ygi_image** map,
                                       double* g2_peak, double* fwhm_pixels);

YGI_API uint64_t ygi_derive_seed(uint64_t base_seed, int64_t sample_id, uint64_t repetition, ygi_mode mode);

/* ---- digits and datasets ----------------------------------------------- */

typedef struct ygi_digits ygi_digits;

/* labels_path may be NULL. */
YGI_API ygi_status ygi_digits_load(const char* images_path, const char* labels_path, ygi_digits** out);
YGI_API void ygi_digits_free(ygi_digits* digits);
YGI_API size_t ygi_digits_count(const ygi_digits* digits);
YGI_API const ygi_image* ygi_digits_image(const ygi_digits* digits, size_t index);
/* -1 when no labels were loaded. */
YGI_API int32_t ygi_digits_label(const ygi_digits* digits, size_t index);

/* Records digits [first, first + count) with sample ids equal to their index. */
YGI_API ygi_status ygi_dataset_generate(const ygi_digits* digits, size_t first, size_t count,
                                        const ygi_optics* optics, ygi_mode mode, uint64_t base_seed,
                                        uint64_t repetition, const char* out_path);

typedef struct ygi_dataset ygi_dataset;

typedef struct ygi_dataset_info {
    uint32_t version;
    uint64_t record_count;
    uint32_t detector_n;
    uint32_t target_n;
    ygi_mode mode;
    uint64_t base_seed;
    ygi_optics optics;
} ygi_dataset_info;

YGI_API ygi_status ygi_dataset_open(const char* path, ygi_dataset** out);
YGI_API void ygi_dataset_free(ygi_dataset* dataset);
YGI_API ygi_status ygi_dataset_info_get(const ygi_dataset* dataset, ygi_dataset_info* info);
/* pair and target may be NULL when not wanted. */
YGI_API ygi_status ygi_dataset_record(ygi_dataset* dataset, uint64_t index, ygi_pair** pair, ygi_image** target,
                                      int64_t* sample_id);

/* ---- classical reconstruction ------------------------------------------ */

typedef struct ygi_classical_options {
    int32_t support_n;
    double beta;
    int32_t iterations;
    int32_t restarts;
    uint64_t seed;
    int32_t error_reduction;
} ygi_classical_options;

YGI_API void ygi_classical_defaults(ygi_classical_options* options);
/* Correlation followed by phase retrieval. modulus and residual may be NULL. */
YGI_API ygi_status ygi_classical_reconstruct(const ygi_pair* pair, const ygi_optics* optics,
                                             const ygi_classical_options* options, ygi_image** image,
                                             ygi_image** modulus, double* residual, int32_t* degenerate);
/* Correlation averaged over an ensemble of pairs. */
YGI_API ygi_status ygi_fourier_modulus(const ygi_pair* const* pairs, size_t count, const ygi_optics* optics,
                                       ygi_image** modulus);

/* ---- network ----------------------------------------------------------- */

typedef struct ygi_model ygi_model;

typedef struct ygi_model_config {
    int32_t encoder_channels[5];
    int32_t decoder_channels[10];
    double dropout_rate;
    int32_t input_n;
    int32_t output_n;
    int32_t final_padding;
    int32_t shared_encoders;
} ygi_model_config;

/* Desk width when full_width is 0, otherwise the full channel plan. */
YGI_API void ygi_model_config_defaults(ygi_model_config* config, int32_t full_width);
/* Layer-by-layer size trace; fails with YGI_ERR_CONFIG if the shapes do not close. */
YGI_API ygi_status ygi_model_geometry(const ygi_model_config* config, char** table);
YGI_API ygi_status ygi_model_create(const ygi_model_config* config, uint64_t seed, ygi_model** out);
/* Restores weights and, when present, optimizer state for resumption. */
YGI_API ygi_status ygi_model_load(const char* path, ygi_model** out);
/* with_state != 0 also stores the optimizer state and epoch counter. */
YGI_API ygi_status ygi_model_save(ygi_model* model, const char* path, int32_t with_state);
YGI_API void ygi_model_free(ygi_model* model);
YGI_API ygi_status ygi_model_config_get(const ygi_model* model, ygi_model_config* config);
YGI_API uint64_t ygi_model_fingerprint(const ygi_model* model);
YGI_API uint64_t ygi_model_parameter_count(const ygi_model* model);
/* Epochs already trained; 0 for a fresh model. */
YGI_API int32_t ygi_model_epochs_done(const ygi_model* model);

YGI_API ygi_status ygi_predict(ygi_model* model, const ygi_image* reference, const ygi_image* test,
                               ygi_image** out);

typedef struct ygi_train_options {
    int32_t epochs; /* total, including epochs already done on a resumed model */
    int32_t batch_size;
    double learning_rate;
    double beta1;
    double beta2;
    double epsilon;
    uint64_t seed;
} ygi_train_options;

typedef struct ygi_epoch_stats {
    int32_t epoch;
    double train_loss;
    double val_loss;
    double val_ssim;
    double val_psnr;
    double seconds;
    int32_t improved;
} ygi_epoch_stats;

typedef void (*ygi_epoch_fn)(const ygi_epoch_stats* stats, void* user);

YGI_API void ygi_train_defaults(ygi_train_options* options);
/* Trains on the records of train_path, validating on val_path after each epoch.
 * When checkpoint_dir is given it receives last.ync (resumable), best.ync
 * (highest validation SSIM) and train_report.csv. */
YGI_API ygi_status ygi_train(ygi_model* model, const char* train_path, const char* val_path,
                             const ygi_train_options* options, const char* checkpoint_dir, ygi_epoch_fn on_epoch,
                             void* user);

typedef struct ygi_evaluation {
    double loss;
    double mean_ssim;
    double mean_psnr;
    uint64_t count;
} ygi_evaluation;

YGI_API ygi_status ygi_evaluate_dataset(ygi_model* model, const char* dataset_path, ygi_evaluation* out);

/* ---- metrics ----------------------------------------------------------- */

YGI_API ygi_status ygi_ssim(const ygi_image* a, const ygi_image* b, double* value);
/* *infinite is set (and *db left at 0) for identical images. */
YGI_API ygi_status ygi_psnr(const ygi_image* a, const ygi_image* b, double* db, int32_t* infinite);
YGI_API ygi_status ygi_mse(const ygi_image* a, const ygi_image* b, double* value);

/* outputs holds method_count * sample_count images, method-major.
 * sample_labels may be NULL. Writes the text table and CSV when the paths are
 * non-NULL and returns them through text / csv when those are non-NULL. */
YGI_API ygi_status ygi_compare_methods(const ygi_image* const* targets, size_t sample_count,
                                       const char* const* method_labels, size_t method_count,
                                       const ygi_image* const* outputs, const char* const* sample_labels,
                                       const char* text_path, const char* csv_path, char** text, char** csv);

/* ---- stability experiment ---------------------------------------------- */

typedef struct ygi_stability ygi_stability;

YGI_API ygi_status ygi_stability_run(ygi_model* model, const ygi_image* sample, int64_t sample_id,
                                     const ygi_optics* optics, int32_t repetitions, uint64_t base_seed,
                                     ygi_stability** out);
YGI_API void ygi_stability_free(ygi_stability* result);
YGI_API int32_t ygi_stability_repetitions(const ygi_stability* result);
/* repetitions x repetitions, row-major. */
YGI_API const double* ygi_stability_matrix(const ygi_stability* result);
YGI_API const double* ygi_stability_target_ssim(const ygi_stability* result);
YGI_API double ygi_stability_mean_offdiagonal(const ygi_stability* result);
YGI_API const ygi_image* ygi_stability_output(const ygi_stability* result, int32_t index);
YGI_API const ygi_pair* ygi_stability_input(const ygi_stability* result, int32_t index);

#ifdef __cplusplus
}
#endif

#endif
