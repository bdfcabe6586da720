// SPDX-License-Identifier: Apache-2.0
//
// risloc: RIS-aided monostatic self-localization simulator
// Copyright (C) 2026 The risloc authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// C interface of the risloc shared library.
//
// All functions return a risloc_status. On failure a description of the most
// recent error on the calling thread is available from risloc_last_error().
// Strings returned through char** parameters are owned by the caller and must
// be released with risloc_string_free().

#ifndef RISLOC_H
#define RISLOC_H

#ifdef __cplusplus
extern "C"
{
#endif

#if defined(_WIN32)
#define RISLOC_API __declspec(dllexport)
#else
#define RISLOC_API __attribute__((visibility("default")))
#endif

    typedef enum risloc_status
    {
        RISLOC_OK = 0,
        RISLOC_ERR_CONFIG = 1,   // invalid configuration or failed validation
        RISLOC_ERR_RUNTIME = 2,  // numerical or I/O failure while running
        RISLOC_ERR_ARGUMENT = 3, // null pointer or unknown command
    } risloc_status;

    typedef struct risloc_config risloc_config;

    RISLOC_API const char *risloc_version(void);
    RISLOC_API const char *risloc_last_error(void);
    RISLOC_API void risloc_string_free(char *str);

    // ---- configuration -------------------------------------------------------------------------

    RISLOC_API risloc_status risloc_config_default(risloc_config **out);
    RISLOC_API risloc_status risloc_config_load(const char *path, risloc_config **out);
    RISLOC_API risloc_status risloc_config_parse(const char *json_text, risloc_config **out);
    RISLOC_API void risloc_config_free(risloc_config *cfg);

    /// KEY=VALUE style override; VALUE is JSON (numbers, arrays, true/false) or a bare string.
    RISLOC_API risloc_status risloc_config_set(risloc_config *cfg, const char *key, const char *value);

    /// Fully resolved configuration (every key present) as pretty-printed JSON.
    RISLOC_API risloc_status risloc_config_to_json(const risloc_config *cfg, char **out);

    /// Static checks. `report` lists one issue per line prefixed by "error: " or
    /// "warning: ". Returns RISLOC_ERR_CONFIG when at least one error was found.
    RISLOC_API risloc_status risloc_validate(const risloc_config *cfg, char **report, int *errors, int *warnings);

    // ---- experiments ---------------------------------------------------------------------------

    /// Runs one experiment and writes its CSV artifacts and manifest.json into `out_dir`.
    /// `command` is one of "peb", "peb-map", "localize", "cdf", "peb-vs-m", "codebook-cache".
    /// `summary` (optional) receives a human-readable result table.
    RISLOC_API risloc_status risloc_run(const risloc_config *cfg, const char *command, const char *out_dir,
                                        char **summary);

    /// PEB at one UE position for a single profile realization `profile`.
    RISLOC_API risloc_status risloc_point_peb(const risloc_config *cfg, const double ue_position[3], int profile,
                                              double *peb, double *condition_number);

#ifdef __cplusplus
}
#endif

#endif
