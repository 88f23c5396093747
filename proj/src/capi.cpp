#include "rbig/rbig.h"

#include "errors.hpp"
#include "flow.hpp"
#include "infotheory.hpp"
#include "io.hpp"
#include "tasks.hpp"

#include <cstdio>
#include <iostream>
#include <mutex>
#include <new>
#include <string>

struct rbig_model {
    rbig::RbigModel model;
};

struct rbig_oneclass {
    rbig::OneClassModel model;
    rbig_model density;
};

struct rbig_dataset {
    rbig::Dataset data;
};

namespace {

thread_local std::string g_last_error;

rbig_status to_status(rbig::ErrorCode code) {
    switch (code) {
        case rbig::ErrorCode::Domain: return RBIG_ERR_DOMAIN;
        case rbig::ErrorCode::DegenerateMarginal: return RBIG_ERR_DEGENERATE_MARGINAL;
        case rbig::ErrorCode::InsufficientData: return RBIG_ERR_INSUFFICIENT_DATA;
        case rbig::ErrorCode::Shape: return RBIG_ERR_SHAPE;
        case rbig::ErrorCode::Config: return RBIG_ERR_CONFIG;
        case rbig::ErrorCode::Parse: return RBIG_ERR_PARSE;
        case rbig::ErrorCode::Io: return RBIG_ERR_IO;
        case rbig::ErrorCode::Corrupt: return RBIG_ERR_CORRUPT;
        case rbig::ErrorCode::Version: return RBIG_ERR_VERSION;
    }
    return RBIG_ERR_INTERNAL;
}

template <class F>
rbig_status guarded(F&& f) {
    try {
        f();
        g_last_error.clear();
        return RBIG_OK;
    } catch (const rbig::Error& e) {
        g_last_error = e.what();
        return to_status(e.code());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return RBIG_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return RBIG_ERR_INTERNAL;
    }
}

rbig_status invalid(const char* what) {
    g_last_error = what;
    return RBIG_ERR_INVALID_ARGUMENT;
}

rbig::Matrix view(const double* data, size_t n, size_t d) {
    return Eigen::Map<const rbig::Matrix>(data, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
}

void copy_out(const rbig::Matrix& m, double* out) {
    std::copy(m.data(), m.data() + m.size(), out);
}

rbig::FitConfig to_config(const rbig_fit_config* c) {
    rbig::FitConfig cfg;
    if (!c) return cfg;
    switch (c->rotation) {
        case RBIG_ROTATION_PCA: cfg.rotation = rbig::RotationKind::Pca; break;
        case RBIG_ROTATION_RANDOM: cfg.rotation = rbig::RotationKind::Random; break;
        case RBIG_ROTATION_ICA: cfg.rotation = rbig::RotationKind::Ica; break;
        default: rbig::fail(rbig::ErrorCode::Config, "unknown rotation kind");
    }
    cfg.max_iterations = c->max_iterations;
    cfg.stop_tolerance_bits = c->stop_tolerance_bits;
    cfg.gaussianity_alpha = c->gaussianity_alpha;
    cfg.seed = c->seed;
    cfg.bins = c->bins;
    cfg.negentropy_bins = c->negentropy_bins;
    cfg.clamp = c->clamp;
    cfg.null_resamples = c->null_resamples;
    cfg.calibration_rows = c->calibration_rows;
    cfg.safety_iterations = c->safety_iterations;
    return cfg;
}

void from_config(const rbig::FitConfig& cfg, rbig_fit_config* c) {
    c->rotation = cfg.rotation == rbig::RotationKind::Random ? RBIG_ROTATION_RANDOM : RBIG_ROTATION_PCA;
    c->max_iterations = cfg.max_iterations;
    c->stop_tolerance_bits = cfg.stop_tolerance_bits;
    c->gaussianity_alpha = cfg.gaussianity_alpha;
    c->seed = cfg.seed;
    c->bins = cfg.bins;
    c->negentropy_bins = cfg.negentropy_bins;
    c->clamp = cfg.clamp;
    c->null_resamples = cfg.null_resamples;
    c->calibration_rows = cfg.calibration_rows;
    c->safety_iterations = cfg.safety_iterations;
}

std::mutex g_warning_mutex;
rbig_warning_fn g_warning_fn = nullptr;
void* g_warning_user = nullptr;

}  // namespace

extern "C" {

const char* rbig_version(void) { return "1.0.0"; }

const char* rbig_status_name(rbig_status status) {
    switch (status) {
        case RBIG_OK: return "ok";
        case RBIG_ERR_DOMAIN: return "domain";
        case RBIG_ERR_DEGENERATE_MARGINAL: return "degenerate_marginal";
        case RBIG_ERR_INSUFFICIENT_DATA: return "insufficient_data";
        case RBIG_ERR_SHAPE: return "shape";
        case RBIG_ERR_CONFIG: return "config";
        case RBIG_ERR_PARSE: return "parse";
        case RBIG_ERR_IO: return "io";
        case RBIG_ERR_CORRUPT: return "corrupt";
        case RBIG_ERR_VERSION: return "version";
        case RBIG_ERR_INVALID_ARGUMENT: return "invalid_argument";
        case RBIG_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

const char* rbig_last_error(void) { return g_last_error.c_str(); }

void rbig_set_warning_handler(rbig_warning_fn fn, void* user) {
    std::lock_guard lock(g_warning_mutex);
    g_warning_fn = fn;
    g_warning_user = user;
    if (!fn) {
        rbig::set_warning_handler([](std::string_view m) { std::cerr << "rbig: warning: " << m << '\n'; });
        return;
    }
    rbig::set_warning_handler([](std::string_view m) {
        const std::string s(m);
        g_warning_fn(s.c_str(), g_warning_user);
    });
}

void rbig_silence_warnings(void) { rbig::set_warning_handler({}); }

void rbig_fit_config_init(rbig_fit_config* config) {
    if (config) from_config(rbig::FitConfig{}, config);
}

rbig_status rbig_fit(const double* data, size_t n, size_t d, const rbig_fit_config* config, rbig_model** out) {
    if (!data || !out) return invalid("rbig_fit: null pointer");
    *out = nullptr;
    return guarded([&] { *out = new rbig_model{rbig::fit(view(data, n, d), to_config(config))}; });
}

void rbig_model_free(rbig_model* model) { delete model; }

size_t rbig_model_dim(const rbig_model* model) { return model ? model->model.dim() : 0; }

size_t rbig_model_layer_count(const rbig_model* model) { return model ? model->model.layers().size() : 0; }

rbig_status rbig_model_config(const rbig_model* model, rbig_fit_config* out) {
    if (!model || !out) return invalid("rbig_model_config: null pointer");
    from_config(model->model.config(), out);
    return RBIG_OK;
}

double rbig_model_multi_information(const rbig_model* model) { return model ? model->model.multi_information_bits() : 0.0; }

rbig_status rbig_transform(const rbig_model* model, const double* x, size_t n, double* out) {
    if (!model || (!x && n) || (!out && n)) return invalid("rbig_transform: null pointer");
    return guarded([&] { copy_out(model->model.transform(view(x, n, model->model.dim())), out); });
}

rbig_status rbig_inverse_transform(const rbig_model* model, const double* y, size_t n, double* out) {
    if (!model || (!y && n) || (!out && n)) return invalid("rbig_inverse_transform: null pointer");
    return guarded([&] { copy_out(model->model.inverse_transform(view(y, n, model->model.dim())), out); });
}

rbig_status rbig_log_density(const rbig_model* model, const double* x, size_t n, double* out) {
    if (!model || (!x && n) || (!out && n)) return invalid("rbig_log_density: null pointer");
    return guarded([&] {
        const rbig::Vector v = model->model.log_density(view(x, n, model->model.dim()));
        std::copy(v.data(), v.data() + v.size(), out);
    });
}

rbig_status rbig_log_abs_det_jacobian(const rbig_model* model, const double* x, size_t n, double* out) {
    if (!model || (!x && n) || (!out && n)) return invalid("rbig_log_abs_det_jacobian: null pointer");
    return guarded([&] {
        const rbig::Vector v = model->model.log_abs_det_jacobian(view(x, n, model->model.dim()));
        std::copy(v.data(), v.data() + v.size(), out);
    });
}

rbig_status rbig_sample(const rbig_model* model, size_t n, uint64_t seed, double* out) {
    if (!model || (!out && n)) return invalid("rbig_sample: null pointer");
    return guarded([&] { copy_out(model->model.sample(n, seed), out); });
}

size_t rbig_trace_length(const rbig_model* model) { return model ? model->model.trace().records.size() : 0; }

int rbig_trace_converged(const rbig_model* model) { return model && model->model.trace().converged ? 1 : 0; }

rbig_status rbig_trace_get(const rbig_model* model, size_t index, rbig_trace_record* out) {
    if (!model || !out) return invalid("rbig_trace_get: null pointer");
    const auto& records = model->model.trace().records;
    if (index >= records.size()) return invalid("rbig_trace_get: index out of range");
    const auto& r = records[index];
    *out = rbig_trace_record{r.iteration, r.jm_bits, r.cumulative_dj_bits, r.gauss_stat, r.gauss_threshold, r.gauss_accept ? 1 : 0, r.wall_seconds};
    return RBIG_OK;
}

rbig_status rbig_model_save(const rbig_model* model, const char* path) {
    if (!model || !path) return invalid("rbig_model_save: null pointer");
    return guarded([&] { rbig::save_model(std::string(path), model->model); });
}

rbig_status rbig_model_load(const char* path, rbig_model** out) {
    if (!path || !out) return invalid("rbig_model_load: null pointer");
    *out = nullptr;
    return guarded([&] { *out = new rbig_model{rbig::load_model(path)}; });
}

rbig_status rbig_marginal_negentropy(const double* samples, size_t n, size_t bins, double* bits, int* low_confidence) {
    if (!samples || !bits) return invalid("rbig_marginal_negentropy: null pointer");
    return guarded([&] {
        const auto est = rbig::marginal_negentropy(std::span<const double>(samples, n), bins);
        *bits = est.bits;
        if (low_confidence) *low_confidence = est.low_confidence ? 1 : 0;
    });
}

rbig_status rbig_total_marginal_negentropy(const double* data, size_t n, size_t d, size_t bins, double* bits) {
    if (!data || !bits) return invalid("rbig_total_marginal_negentropy: null pointer");
    return guarded([&] { *bits = rbig::total_marginal_negentropy(view(data, n, d), bins); });
}

rbig_status rbig_multi_information(const double* data, size_t n, size_t d, const rbig_fit_config* config, double* bits) {
    if (!data || !bits) return invalid("rbig_multi_information: null pointer");
    return guarded([&] { *bits = rbig::multi_information(view(data, n, d), to_config(config)); });
}

rbig_status rbig_gaussianity_test(const double* data, size_t n, size_t d, double alpha, size_t null_resamples, uint64_t seed,
                                  size_t calibration_rows, rbig_gauss_verdict* out) {
    if (!data || !out) return invalid("rbig_gaussianity_test: null pointer");
    return guarded([&] {
        rbig::GaussianityOptions opt;
        opt.null_resamples = null_resamples;
        opt.seed = seed;
        opt.calibration_rows = calibration_rows;
        const auto v = rbig::gaussianity_test(view(data, n, d), alpha, opt);
        *out = rbig_gauss_verdict{v.statistic, v.threshold, v.alpha, v.accept ? 1 : 0};
    });
}

rbig_status rbig_oneclass_fit(const double* data, size_t n, size_t d, double nu, const rbig_fit_config* config, rbig_oneclass** out) {
    if (!data || !out) return invalid("rbig_oneclass_fit: null pointer");
    *out = nullptr;
    return guarded([&] {
        auto m = rbig::fit_one_class(view(data, n, d), nu, to_config(config));
        *out = new rbig_oneclass{m, rbig_model{m.density_model()}};
    });
}

void rbig_oneclass_free(rbig_oneclass* model) { delete model; }

double rbig_oneclass_threshold(const rbig_oneclass* model) { return model ? model->model.log_threshold() : 0.0; }

double rbig_oneclass_nu(const rbig_oneclass* model) { return model ? model->model.nu() : 0.0; }

const rbig_model* rbig_oneclass_density(const rbig_oneclass* model) { return model ? &model->density : nullptr; }

rbig_status rbig_oneclass_score(const rbig_oneclass* model, const double* x, size_t n, double* log_density, int* accept) {
    if (!model || (!x && n) || (!log_density && n)) return invalid("rbig_oneclass_score: null pointer");
    return guarded([&] {
        const auto s = rbig::score(model->model, view(x, n, model->model.density_model().dim()));
        std::copy(s.log_density.data(), s.log_density.data() + s.log_density.size(), log_density);
        if (accept)
            for (size_t i = 0; i < n; ++i) accept[i] = s.accept[i];
    });
}

rbig_status rbig_oneclass_save(const rbig_oneclass* model, const char* path) {
    if (!model || !path) return invalid("rbig_oneclass_save: null pointer");
    return guarded([&] {
        rbig::save_model(std::string(path), model->model.density_model(), rbig::OneClassParams{model->model.nu(), model->model.log_threshold()});
    });
}

rbig_status rbig_oneclass_load(const char* path, rbig_oneclass** out) {
    if (!path || !out) return invalid("rbig_oneclass_load: null pointer");
    *out = nullptr;
    return guarded([&] {
        auto loaded = rbig::load_model_file(std::string(path));
        if (!loaded.one_class) rbig::fail(rbig::ErrorCode::Corrupt, std::string(path) + " is a density model, not a one-class model");
        rbig::OneClassModel m(loaded.model, loaded.one_class->log_threshold, loaded.one_class->nu);
        *out = new rbig_oneclass{std::move(m), rbig_model{std::move(loaded.model)}};
    });
}

rbig_status rbig_denoise(const rbig_model* prior, const double* noisy, size_t n, const double* sigma, size_t n_posterior,
                         uint64_t seed, double* out, int* fallback) {
    if (!prior || !sigma || (!noisy && n) || (!out && n)) return invalid("rbig_denoise: null pointer");
    return guarded([&] {
        const size_t d = prior->model.dim();
        rbig::NoiseModel noise{std::vector<double>(sigma, sigma + d)};
        const auto r = rbig::denoise(prior->model, view(noisy, n, d), noise, n_posterior, seed);
        copy_out(r.values, out);
        if (fallback)
            for (size_t i = 0; i < n; ++i) fallback[i] = r.fallback[i];
    });
}

rbig_status rbig_dataset_load_csv(const char* path, int has_header, rbig_dataset** out) {
    if (!path || !out) return invalid("rbig_dataset_load_csv: null pointer");
    *out = nullptr;
    return guarded([&] { *out = new rbig_dataset{rbig::load_csv(path, has_header != 0)}; });
}

void rbig_dataset_free(rbig_dataset* dataset) { delete dataset; }

size_t rbig_dataset_rows(const rbig_dataset* dataset) { return dataset ? static_cast<size_t>(dataset->data.values.rows()) : 0; }

size_t rbig_dataset_cols(const rbig_dataset* dataset) { return dataset ? static_cast<size_t>(dataset->data.values.cols()) : 0; }

size_t rbig_dataset_rejected(const rbig_dataset* dataset) { return dataset ? dataset->data.rejected_rows : 0; }

const double* rbig_dataset_data(const rbig_dataset* dataset) { return dataset ? dataset->data.values.data() : nullptr; }

const char* rbig_dataset_column_name(const rbig_dataset* dataset, size_t column) {
    if (!dataset || column >= dataset->data.columns.size()) return nullptr;
    return dataset->data.columns[column].c_str();
}

rbig_status rbig_write_csv(const char* path, const double* values, size_t n, size_t d, const char* const* header) {
    if (!path || (!values && n)) return invalid("rbig_write_csv: null pointer");
    return guarded([&] {
        std::vector<std::string> names;
        if (header)
            for (size_t j = 0; j < d; ++j) names.emplace_back(header[j] ? header[j] : "");
        const rbig::Matrix m = view(values, n, d);
        if (std::string(path) == "-") {
            rbig::write_csv(std::cout, m, names);
            std::cout.flush();
        } else {
            rbig::write_csv(std::string(path), m, names);
        }
    });
}

}  // extern "C"
