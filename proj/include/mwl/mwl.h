// Copyright 2026 The mwlnet Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// C interface to the mwl library. All functions are thread compatible;
// the last error message is kept per thread.

#ifndef MWL_MWL_H_
#define MWL_MWL_H_

#include <stddef.h>

#if defined(_WIN32)
#if defined(MWL_BUILDING_LIBRARY)
#define MWL_API __declspec(dllexport)
#else
#define MWL_API __declspec(dllimport)
#endif
#else
#define MWL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mwl_status {
  MWL_OK = 0,
  MWL_ERR_GENERIC = 1,
  MWL_ERR_INPUT = 2,     // unreadable, malformed or invalid input
  MWL_ERR_TRAINING = 3,  // training diverged
  MWL_ERR_CONFIG = 4,    // configuration mismatch
} mwl_status;

typedef struct mwl_model mwl_model;

MWL_API const char* mwl_version(void);

// Message of the last failed call on this thread, or "" after a success.
MWL_API const char* mwl_last_error(void);

// Releases strings returned through char** out-parameters.
MWL_API void mwl_string_free(char* str);

// Runs one of synth, preprocess, train, eval, predict, ablation or
// spectrum. `config_json` is a JSON object of run settings (may be NULL or
// "{}" for defaults). On success *out_json receives a JSON summary owned by
// the caller; out_json may be NULL.
MWL_API mwl_status mwl_run(const char* command, const char* config_json,
                           char** out_json);

// Loads a trained checkpoint directory.
MWL_API mwl_status mwl_model_load(const char* dir, mwl_model** out);
MWL_API void mwl_model_free(mwl_model* model);

// JSON with the model configuration and parameter count.
MWL_API mwl_status mwl_model_info(const mwl_model* model, char** out_json);

// Window length in samples expected by mwl_model_predict.
MWL_API size_t mwl_model_window(const mwl_model* model);

// 3 for a class3 head, 1 for a continuous head.
MWL_API size_t mwl_model_output_size(const mwl_model* model);

// `samples` is row-major n_samples x 14 in canonical channel order, with
// n_samples equal to mwl_model_window(). Writes class probabilities or the
// continuous level to `out`, which holds `out_len` doubles.
MWL_API mwl_status mwl_model_predict(const mwl_model* model,
                                     const double* samples, size_t n_samples,
                                     double* out, size_t out_len);

// Welch PSD of a row-major n_samples x n_channels window. Writes
// (nfft / 2 + 1) x n_channels densities to `out`.
MWL_API mwl_status mwl_welch_psd(const double* samples, size_t n_samples,
                                 size_t n_channels, size_t nfft, double fs,
                                 double* out, size_t out_len);

// Six-band 6 x 6 x K block of a 14-channel window, row-major
// [row][col][depth]. *depth receives K; `out` must hold 36 * K doubles.
MWL_API mwl_status mwl_block3d(const double* samples, size_t n_samples,
                               size_t nfft, double* out, size_t out_len,
                               size_t* depth);

#ifdef __cplusplus
}  // extern "C"
#endif

#endif  // MWL_MWL_H_
