#include "relight.h"

#include <json.hpp>

#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "relight/errors.hpp"
#include "relight/image.hpp"
#include "relight/image_io.hpp"
#include "relight/metrics.hpp"
#include "relight/pipeline.hpp"
#include "relight/solver.hpp"

struct relight_image {
    relight::ColorImage img;
};

struct relight_decomposition {
    std::vector<relight::DecompositionState> trace;
};

namespace {

thread_local std::string g_last_error = "no error";

void set_error(const char* msg) { g_last_error = msg; }

// Runs the body and folds any exception into a status code + stored message.
template <typename F>
relight_status guarded(F&& body) {
    try {
        body();
        return RELIGHT_OK;
    } catch (const relight::InvalidArgumentError& e) {
        g_last_error = e.what();
        return RELIGHT_ERR_INVALID_ARGUMENT;
    } catch (const relight::IoError& e) {
        g_last_error = e.what();
        return RELIGHT_ERR_IO;
    } catch (const relight::FormatError& e) {
        g_last_error = e.what();
        return RELIGHT_ERR_FORMAT;
    } catch (const relight::ConfigError& e) {
        g_last_error = e.what();
        return RELIGHT_ERR_CONFIG;
    } catch (const relight::NumericError& e) {
        g_last_error = e.what();
        return RELIGHT_ERR_NUMERIC;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return RELIGHT_ERR_UNKNOWN;
    }
}

relight_status invalid(const char* msg) {
    set_error(msg);
    return RELIGHT_ERR_INVALID_ARGUMENT;
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out != nullptr) {
        std::memcpy(out, s.c_str(), s.size() + 1);
    }
    return out;
}

relight::RunConfig config_from(const char* config_json) {
    return config_json == nullptr ? relight::RunConfig{}
                                  : relight::parse_run_config(config_json);
}

} // namespace

extern "C" {

const char* relight_last_error(void) { return g_last_error.c_str(); }

relight_status relight_image_load(const char* path, relight_image** out) {
    if (path == nullptr || out == nullptr) return invalid("relight_image_load: NULL argument");
    return guarded([&] { *out = new relight_image{relight::load_image(path)}; });
}

relight_status relight_image_create(int height, int width, const double* rgb_interleaved,
                                    relight_image** out) {
    if (rgb_interleaved == nullptr || out == nullptr) {
        return invalid("relight_image_create: NULL argument");
    }
    if (height <= 0 || width <= 0) {
        return invalid("relight_image_create: dimensions must be positive");
    }
    return guarded([&] {
        relight::ColorImage img(height, width, 0.0);
        const std::size_t n = static_cast<std::size_t>(height) * width;
        for (std::size_t p = 0; p < n; ++p) {
            for (int c = 0; c < 3; ++c) {
                img.channel(c).data()[p] = rgb_interleaved[3 * p + static_cast<std::size_t>(c)];
            }
        }
        *out = new relight_image{std::move(img)};
    });
}

relight_status relight_image_save(const relight_image* img, const char* path) {
    if (img == nullptr || path == nullptr) return invalid("relight_image_save: NULL argument");
    return guarded([&] { relight::save_image(img->img, path); });
}

int relight_image_height(const relight_image* img) {
    return img == nullptr ? 0 : img->img.height();
}

int relight_image_width(const relight_image* img) {
    return img == nullptr ? 0 : img->img.width();
}

relight_status relight_image_pixels(const relight_image* img, double* rgb_interleaved) {
    if (img == nullptr || rgb_interleaved == nullptr) {
        return invalid("relight_image_pixels: NULL argument");
    }
    const std::size_t n = img->img.channel(0).size();
    for (std::size_t p = 0; p < n; ++p) {
        for (int c = 0; c < 3; ++c) {
            rgb_interleaved[3 * p + static_cast<std::size_t>(c)] = img->img.channel(c).data()[p];
        }
    }
    return RELIGHT_OK;
}

void relight_image_free(relight_image* img) { delete img; }

relight_status relight_decompose(const relight_image* img, const char* config_json,
                                 relight_decomposition** out) {
    if (img == nullptr || out == nullptr) return invalid("relight_decompose: NULL argument");
    return guarded([&] {
        const relight::RunConfig cfg = config_from(config_json);
        *out = new relight_decomposition{relight::decompose(img->img, cfg.solver)};
    });
}

int relight_decomposition_stages(const relight_decomposition* d) {
    return d == nullptr ? 0 : static_cast<int>(d->trace.size());
}

namespace {

relight_status check_stage(const relight_decomposition* d, int stage, const char* who) {
    if (d == nullptr) return invalid("NULL decomposition handle");
    if (stage < 0 || stage >= static_cast<int>(d->trace.size())) {
        g_last_error = std::string(who) + ": stage index out of range";
        return RELIGHT_ERR_INVALID_ARGUMENT;
    }
    return RELIGHT_OK;
}

} // namespace

relight_status relight_decomposition_objective(const relight_decomposition* d, int stage,
                                               double* out) {
    if (out == nullptr) return invalid("relight_decomposition_objective: NULL argument");
    const relight_status st = check_stage(d, stage, "relight_decomposition_objective");
    if (st != RELIGHT_OK) return st;
    *out = d->trace[static_cast<std::size_t>(stage)].objective;
    return RELIGHT_OK;
}

relight_status relight_decomposition_reflectance(const relight_decomposition* d, int stage,
                                                 relight_image** out) {
    if (out == nullptr) return invalid("relight_decomposition_reflectance: NULL argument");
    const relight_status st = check_stage(d, stage, "relight_decomposition_reflectance");
    if (st != RELIGHT_OK) return st;
    return guarded(
        [&] { *out = new relight_image{d->trace[static_cast<std::size_t>(stage)].R}; });
}

relight_status relight_decomposition_illumination(const relight_decomposition* d, int stage,
                                                  relight_image** out) {
    if (out == nullptr) return invalid("relight_decomposition_illumination: NULL argument");
    const relight_status st = check_stage(d, stage, "relight_decomposition_illumination");
    if (st != RELIGHT_OK) return st;
    return guarded([&] {
        const relight::ImagePlane& L = d->trace[static_cast<std::size_t>(stage)].L;
        *out = new relight_image{relight::ColorImage(L, L, L)};
    });
}

void relight_decomposition_free(relight_decomposition* d) { delete d; }

relight_status relight_enhance(const char* input_path, const char* config_json,
                               const double* alpha_override, char** report_json) {
    if (input_path == nullptr) return invalid("relight_enhance: NULL input path");
    return guarded([&] {
        const relight::RunConfig cfg = config_from(config_json);
        const relight::EnhanceOutputs outputs =
            relight::cmd_enhance(input_path, cfg, alpha_override);
        if (report_json != nullptr) {
            const nlohmann::json paths{{"enhanced_path", outputs.enhanced_path},
                                       {"report_path", outputs.report_path}};
            *report_json = dup_string(paths.dump());
        }
    });
}

relight_status relight_benchmark(const char* manifest_path, const char* config_json,
                                 const char* report_path) {
    if (manifest_path == nullptr || report_path == nullptr) {
        return invalid("relight_benchmark: NULL argument");
    }
    return guarded([&] {
        const relight::RunConfig cfg = config_from(config_json);
        const relight::DatasetManifest manifest = relight::load_manifest(manifest_path);
        relight::cmd_benchmark(manifest, cfg, report_path);
    });
}

relight_status relight_metrics(const relight_image* enhanced, const relight_image* reference,
                               const relight_image* low, char** metrics_json) {
    if (enhanced == nullptr || reference == nullptr || low == nullptr ||
        metrics_json == nullptr) {
        return invalid("relight_metrics: NULL argument");
    }
    return guarded([&] {
        relight::MetricsReport report;
        report.psnr = relight::psnr(enhanced->img, reference->img);
        report.ssim = relight::ssim(enhanced->img, reference->img);
        report.loe = relight::loe(enhanced->img, low->img);
        report.loe_ref = relight::loe(enhanced->img, reference->img);
        report.losses["loss_color_angle"] = relight::loss_color_angle(enhanced->img, reference->img);
        report.losses["loss_enhancement"] = relight::loss_enhancement(enhanced->img, reference->img);
        *metrics_json = dup_string(relight::metrics_report_json(report));
    });
}

void relight_string_free(char* s) { std::free(s); }

} // extern "C"
