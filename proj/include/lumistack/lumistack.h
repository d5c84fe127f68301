/* SPDX-License-Identifier: Apache-2.0
 * Copyright 2026 The lumistack Authors
 *
 * C interface to lumistack: light field reconstruction from a focal stack.
 *
 * Every object is an opaque handle released with its matching *_free call.
 * Functions return LS_OK or an error code; the message of the most recent
 * failure on the calling thread is available from ls_last_error().
 * Handles are immutable after creation and may be shared across threads.
 */
#ifndef LUMISTACK_LUMISTACK_H
#define LUMISTACK_LUMISTACK_H

#include <stddef.h>
#include <stdint.h>

#if defined(LUMISTACK_BUILDING_LIBRARY)
#define LS_API __attribute__((visibility("default")))
#else
#define LS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ls_status {
  LS_OK = 0,
  LS_ERR_INVALID_INPUT = 1,
  LS_ERR_CALIBRATION = 2,
  LS_ERR_NO_REAL_IMAGE = 3,
  LS_ERR_IO = 4,
  LS_ERR_FORMAT = 5,
  LS_ERR_INTERNAL = 6
} ls_status;

typedef struct ls_buffer ls_buffer;
typedef struct ls_image ls_image;
typedef struct ls_calibration ls_calibration;
typedef struct ls_stack ls_stack;
typedef struct ls_focus_map ls_focus_map;
typedef struct ls_depth_map ls_depth_map;
typedef struct ls_slab ls_slab;

/* Pipeline parameters. ls_params_default fills the documented defaults;
 * aperture_scale <= 0 means "derive from max_parallax". */
typedef struct ls_params {
  int score_steps;
  double lambda;
  int median_radius;
  int u_samples;
  double aperture_scale;
  double max_parallax;
  int threads;
} ls_params;

LS_API const char* ls_version(void);
LS_API const char* ls_last_error(void);
LS_API void ls_params_default(ls_params* out);

/* Byte buffers returned by encoders and text records. */
LS_API const uint8_t* ls_buffer_data(const ls_buffer* buf);
LS_API size_t ls_buffer_size(const ls_buffer* buf);
LS_API void ls_buffer_free(ls_buffer* buf);

/* Images */
LS_API ls_status ls_image_read_png(const char* path, ls_image** out);
LS_API ls_status ls_image_write_png(const ls_image* img, const char* path);
LS_API ls_status ls_image_encode_png(const ls_image* img, ls_buffer** out);
LS_API void ls_image_size(const ls_image* img, int* width, int* height, int* channels);
LS_API void ls_image_free(ls_image* img);

/* Calibration: fit from a `focus_param,near_m,far_m` table, or load a model
 * written by ls_calibration_save. */
LS_API ls_status ls_calibration_fit_csv(const char* table_path, double last_row_weight,
                                        ls_calibration** out);
LS_API ls_status ls_calibration_load(const char* model_path, ls_calibration** out);
LS_API ls_status ls_calibration_save(const ls_calibration* cal, const char* model_path);
LS_API void ls_calibration_coefficients(const ls_calibration* cal, double* slope,
                                        double* intercept, double* r_squared);
LS_API int ls_calibration_row_count(const ls_calibration* cal);
LS_API ls_status ls_calibration_row(const ls_calibration* cal, int index, double* focus_param,
                                    double* midpoint_m, double* predicted_m);
/* clamped (nullable) is set to 1 when focus_param lay outside the fitted range. */
LS_API ls_status ls_calibration_depth(const ls_calibration* cal, double focus_param,
                                      double* depth_m, int* clamped);
LS_API void ls_calibration_free(ls_calibration* cal);

/* Focal stack described by a JSON manifest. `params` receives the manifest's
 * parameters (nullable). */
LS_API ls_status ls_stack_open(const char* manifest_path, ls_stack** out, ls_params* params);
LS_API void ls_stack_size(const ls_stack* stack, int* width, int* height, int* channels,
                          int* count);
/* Calibration named by the manifest, or NULL in *out when there is none. */
LS_API ls_status ls_stack_calibration(const ls_stack* stack, ls_calibration** out);
LS_API void ls_stack_free(ls_stack* stack);

/* Focus map: graph-cut estimate followed by the median filter. */
LS_API ls_status ls_focus_map_compute(const ls_stack* stack, const ls_params* params,
                                      ls_focus_map** out);
LS_API ls_status ls_focus_map_read_png(const char* path, int label_count, ls_focus_map** out);
LS_API ls_status ls_focus_map_write_png(const ls_focus_map* map, const char* path);
LS_API ls_status ls_focus_map_encode_png(const ls_focus_map* map, ls_buffer** out);
/* JSON record of K, parameters and per-image thresholds. */
LS_API ls_status ls_focus_map_sidecar(const ls_focus_map* map, ls_buffer** out);
LS_API ls_status ls_focus_map_label(const ls_focus_map* map, int x, int y, int* label);
LS_API void ls_focus_map_size(const ls_focus_map* map, int* width, int* height,
                              int* label_count);
LS_API void ls_focus_map_free(ls_focus_map* map);

/* Depth map. `cal` may be NULL when every image carries a focus distance. */
LS_API ls_status ls_depth_map_compute(const ls_stack* stack, const ls_focus_map* map,
                                      const ls_calibration* cal, ls_depth_map** out);
LS_API ls_status ls_depth_map_write_png(const ls_depth_map* depth, const char* path);
LS_API ls_status ls_depth_map_encode_png(const ls_depth_map* depth, ls_buffer** out);
LS_API ls_status ls_depth_map_sidecar(const ls_depth_map* depth, ls_buffer** out);
LS_API int ls_depth_map_label_count(const ls_depth_map* depth);
LS_API double ls_depth_map_label_depth(const ls_depth_map* depth, int label);
LS_API void ls_depth_map_free(ls_depth_map* depth);

LS_API ls_status ls_extended_focus(const ls_stack* stack, const ls_focus_map* map,
                                   ls_image** out);

/* Light field slab LF(x, y, u, 0). */
LS_API ls_status ls_slab_reconstruct(const ls_stack* stack, const ls_focus_map* map,
                                     const ls_depth_map* depth, const ls_params* params,
                                     ls_slab** out);
LS_API ls_status ls_slab_read(const char* path, ls_slab** out);
LS_API ls_status ls_slab_write(const ls_slab* slab, const char* path);
LS_API ls_status ls_slab_encode(const ls_slab* slab, ls_buffer** out);
LS_API void ls_slab_size(const ls_slab* slab, int* width, int* height, int* u_samples,
                         int* channels);
/* JSON record: dimensions, u range, label depths and layer slopes. */
LS_API ls_status ls_slab_meta(const ls_slab* slab, ls_buffer** out);
/* Depth map implied by a focus map and the slab's label depths. */
LS_API ls_status ls_slab_depth_map(const ls_slab* slab, const ls_focus_map* map,
                                   ls_depth_map** out);
LS_API void ls_slab_free(ls_slab* slab);

/* Rendering */
LS_API ls_status ls_render_view(const ls_slab* slab, int u, ls_image** out);
LS_API ls_status ls_render_refocus(const ls_slab* slab, double slope, int threads,
                                   ls_image** out);
LS_API ls_status ls_render_refocus_depth(const ls_slab* slab, double depth_m, int threads,
                                         ls_image** out, double* slope);
/* Refocus on the layer under (x, y); label, depth_m and slope are nullable. */
LS_API ls_status ls_render_refocus_click(const ls_slab* slab, const ls_focus_map* map, int x,
                                         int y, int threads, ls_image** out, int* label,
                                         double* depth_m, double* slope);
/* Fills up to `capacity` u positions of an even sweep; *count gets the total. */
LS_API ls_status ls_sweep_positions(int u_min, int u_max, int frames, int* positions,
                                    int capacity, int* count);

#ifdef __cplusplus
}
#endif

#endif /* LUMISTACK_LUMISTACK_H */
