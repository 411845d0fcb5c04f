#ifndef HBT_CAPI_H
#define HBT_CAPI_H

/* C API for the HBT bench simulator and analysis chain.
 *
 * All entry points return hbt_status; on any non-OK status a thread-local
 * message is available via hbt_last_error(). Out-parameters are untouched
 * on failure. Handles are opaque and must be released with the matching
 * _free function.
 */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hbt_status {
    HBT_OK = 0,
    HBT_ERR_CONFIG = 2,
    HBT_ERR_VALIDATION = 3,
    HBT_ERR_CONVERGENCE = 4,
    HBT_ERR_IO = 5,
} hbt_status;

typedef struct hbt_config hbt_config;
typedef struct hbt_report hbt_report;

const char* hbt_version(void);

/* Message for the most recent failure on this thread ("" if none). The
 * pointer stays valid until the next failing call on the same thread. */
const char* hbt_last_error(void);

/* --- configuration ------------------------------------------------------ */

hbt_status hbt_config_default(hbt_config** out);
hbt_status hbt_config_preset(const char* name, hbt_config** out);
hbt_status hbt_config_parse_file(const char* path, hbt_config** out);
hbt_status hbt_config_set(hbt_config* cfg, const char* key, const char* value);
void hbt_config_free(hbt_config* cfg);

/* --- pipelines ---------------------------------------------------------- */

/* Simulate an HBT acquisition, write "<prefix>timestamps.csv" and return a
 * run summary report. */
hbt_status hbt_simulate(const hbt_config* cfg, const char* out_prefix, hbt_report** out);

/* Cross-correlate a two-channel timestamp file, integrate the pulse peaks
 * and compute g2(0). Writes "<prefix>histogram.csv". The config supplies
 * the analysis parameters, pulse period and dark rates. */
hbt_status hbt_correlate(const hbt_config* cfg, const char* timestamps_path,
                         const char* out_prefix, hbt_report** out);

/* Decay-curve fit. `input_path` is either a histogram CSV (is_histogram
 * nonzero) or a timestamp CSV whose first two channels are start/stop.
 * fix_sigma_ps > 0 holds the instrument-response width fixed. */
hbt_status hbt_lifetime(const hbt_config* cfg, const char* input_path, int is_histogram,
                        double fix_sigma_ps, hbt_report** out);

/* Gaussian instrument-response fit of a histogram or start-stop timestamp
 * file, same input convention as hbt_lifetime. */
hbt_status hbt_irf(const hbt_config* cfg, const char* input_path, int is_histogram,
                   hbt_report** out);

/* Flatness test of the cross-correlation of two click streams. */
hbt_status hbt_crosstalk(const hbt_config* cfg, const char* timestamps_path,
                         hbt_report** out);

/* Render a histogram CSV as a standalone SVG. `title` may be NULL. */
hbt_status hbt_plot(const char* histogram_path, const char* svg_path, const char* title,
                    int log_scale);

/* End-to-end reproduction of one of the canned figures ("fig2", "fig3",
 * "fig4") into out_dir. Deterministic for a given seed. */
hbt_status hbt_reproduce(const char* figure, uint64_t seed, const char* out_dir,
                         hbt_report** out);

/* --- reports ------------------------------------------------------------ */

size_t hbt_report_size(const hbt_report* rep);
const char* hbt_report_key(const hbt_report* rep, size_t i);
const char* hbt_report_value(const hbt_report* rep, size_t i);
/* NULL if the key is absent. */
const char* hbt_report_get(const hbt_report* rep, const char* key);
hbt_status hbt_report_write(const hbt_report* rep, const char* path);
/* Full text form, newline-terminated; owned by the report. */
const char* hbt_report_text(const hbt_report* rep);
void hbt_report_free(hbt_report* rep);

#ifdef __cplusplus
}
#endif

#endif /* HBT_CAPI_H */
