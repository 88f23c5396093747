#include <rbig/rbig.h>

#include <CLI11.hpp>

#include <cinttypes>
#include <cstdio>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct Failure {
    rbig_status status;
    std::string message;
};

void check(rbig_status s) {
    if (s != RBIG_OK) throw Failure{s, rbig_last_error()};
}

struct DatasetDeleter {
    void operator()(rbig_dataset* d) const { rbig_dataset_free(d); }
};
struct ModelDeleter {
    void operator()(rbig_model* m) const { rbig_model_free(m); }
};
struct OneClassDeleter {
    void operator()(rbig_oneclass* m) const { rbig_oneclass_free(m); }
};
using DatasetPtr = std::unique_ptr<rbig_dataset, DatasetDeleter>;
using ModelPtr = std::unique_ptr<rbig_model, ModelDeleter>;
using OneClassPtr = std::unique_ptr<rbig_oneclass, OneClassDeleter>;

DatasetPtr load(const std::string& path, bool header) {
    rbig_dataset* d = nullptr;
    check(rbig_dataset_load_csv(path.c_str(), header ? 1 : 0, &d));
    DatasetPtr ds(d);
    if (const size_t rejected = rbig_dataset_rejected(d))
        std::fprintf(stderr, "rbig: %zu rows with non-finite values dropped from %s\n", rejected, path.c_str());
    return ds;
}

ModelPtr load_model(const std::string& path) {
    rbig_model* m = nullptr;
    check(rbig_model_load(path.c_str(), &m));
    return ModelPtr(m);
}

void write(const std::string& path, const std::vector<double>& values, size_t n, size_t d, const std::vector<std::string>& header = {}) {
    std::vector<const char*> names;
    for (const auto& h : header) names.push_back(h.c_str());
    check(rbig_write_csv(path.c_str(), values.data(), n, d, header.empty() ? nullptr : names.data()));
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void emit(const std::string& path, const std::string& text) {
    if (path == "-") {
        std::fputs(text.c_str(), stdout);
        return;
    }
    FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw Failure{RBIG_ERR_IO, "cannot open '" + path + "' for writing"};
    std::fputs(text.c_str(), f);
    if (std::fclose(f) != 0) throw Failure{RBIG_ERR_IO, "write to '" + path + "' failed"};
}

struct FitFlags {
    std::string rotation = "pca";
    rbig_fit_config config{};

    void add(CLI::App* app) {
        rbig_fit_config_init(&config);
        app->add_option("--rotation", rotation, "pca or random")->check(CLI::IsMember({"pca", "random", "rnd", "ica"}));
        app->add_option("--seed", config.seed, "random seed");
        app->add_option("--max-iterations", config.max_iterations);
        app->add_option("--tolerance", config.stop_tolerance_bits, "stop tolerance in bits (default: automatic, at least 0.005 * d)");
        app->add_option("--alpha", config.gaussianity_alpha, "Gaussianity test level");
        app->add_option("--bins", config.bins, "CDF bins (0 = automatic)");
        app->add_option("--negentropy-bins", config.negentropy_bins, "negentropy histogram bins (0 = automatic)");
        app->add_option("--clamp", config.clamp, "CDF clamp");
        app->add_option("--null-resamples", config.null_resamples);
        app->add_option("--calibration-rows", config.calibration_rows, "rows per null resample (0 = n)");
        app->add_option("--safety-iterations", config.safety_iterations);
    }

    const rbig_fit_config* get() {
        if (rotation == "pca") config.rotation = RBIG_ROTATION_PCA;
        else if (rotation == "ica") config.rotation = RBIG_ROTATION_ICA;
        else config.rotation = RBIG_ROTATION_RANDOM;
        return &config;
    }
};

std::vector<double> parse_sigma(const std::string& text, size_t d) {
    std::vector<double> sigma;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            size_t used = 0;
            sigma.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw Failure{RBIG_ERR_INVALID_ARGUMENT, "--sigma: cannot parse '" + item + "'"};
        }
    }
    if (sigma.size() == 1) sigma.assign(d, sigma[0]);
    if (sigma.size() != d) throw Failure{RBIG_ERR_SHAPE, "--sigma needs 1 or " + std::to_string(d) + " values"};
    return sigma;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rotation-based iterative Gaussianization"};
    app.require_subcommand(1);
    app.set_version_flag("--version", rbig_version());

    std::string in, out = "-", model_path;
    bool header = false;
    auto add_in = [&](CLI::App* c) {
        c->add_option("--in", in, "input CSV")->required();
        c->add_flag("--header", header, "input CSV has a header row");
    };
    auto add_out = [&](CLI::App* c, bool required) {
        auto* o = c->add_option("--out", out, "output path ('-' for stdout)");
        if (required) o->required();
    };
    auto add_model = [&](CLI::App* c) { c->add_option("--model", model_path, "model file")->required(); };

    FitFlags fit_flags;
    auto* fit = app.add_subcommand("fit", "fit a model");
    add_in(fit);
    add_out(fit, true);
    fit_flags.add(fit);

    auto* transform = app.add_subcommand("transform", "map data to the Gaussian domain");
    add_model(transform);
    add_in(transform);
    add_out(transform, false);

    auto* invert = app.add_subcommand("invert", "map Gaussian-domain data back");
    add_model(invert);
    add_in(invert);
    add_out(invert, false);

    size_t count = 0;
    std::uint64_t seed = 0;
    auto* sample = app.add_subcommand("sample", "draw samples from a model");
    add_model(sample);
    sample->add_option("--n", count, "number of samples")->required();
    sample->add_option("--seed", seed);
    add_out(sample, false);

    auto* density = app.add_subcommand("density", "log-density (nats) per row");
    add_model(density);
    add_in(density);
    add_out(density, false);

    FitFlags mi_flags;
    auto* mi = app.add_subcommand("mi", "multi-information in bits");
    add_in(mi);
    mi_flags.add(mi);

    size_t bins = 0;
    auto* negentropy = app.add_subcommand("negentropy", "marginal negentropy per column in bits");
    add_in(negentropy);
    negentropy->add_option("--bins", bins);
    add_out(negentropy, false);

    double alpha = 0.05;
    size_t resamples = 200, calibration_rows = 0;
    auto* gausstest = app.add_subcommand("gausstest", "energy test of standard multivariate normality");
    add_in(gausstest);
    gausstest->add_option("--alpha", alpha);
    gausstest->add_option("--seed", seed);
    gausstest->add_option("--null-resamples", resamples);
    gausstest->add_option("--calibration-rows", calibration_rows, "rows per null resample (0 = n)");

    double nu = 0.1;
    FitFlags oc_flags;
    auto* oc_fit = app.add_subcommand("oneclass-fit", "fit a one-class density threshold");
    add_in(oc_fit);
    add_out(oc_fit, true);
    oc_fit->add_option("--nu", nu, "training rejection fraction");
    oc_flags.add(oc_fit);

    auto* oc_score = app.add_subcommand("oneclass-score", "score rows against a one-class model");
    add_model(oc_score);
    add_in(oc_score);
    add_out(oc_score, false);

    std::string sigma_text;
    size_t n_posterior = 8000;
    auto* denoise = app.add_subcommand("denoise", "posterior-mean denoising under additive Gaussian noise");
    add_model(denoise);
    add_in(denoise);
    denoise->add_option("--sigma", sigma_text, "noise std, one value or one per column")->required();
    denoise->add_option("--n-posterior", n_posterior);
    denoise->add_option("--seed", seed);
    add_out(denoise, false);

    auto* trace = app.add_subcommand("trace-export", "write the fit trace as CSV");
    add_model(trace);
    add_out(trace, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "error: code=usage message=\"%s\"\n", e.what());
        std::fprintf(stderr, "%s", app.help().c_str());
        return 2;
    }

    try {
        if (fit->parsed() || oc_fit->parsed()) {
            auto ds = load(in, header);
            const size_t n = rbig_dataset_rows(ds.get()), d = rbig_dataset_cols(ds.get());
            if (fit->parsed()) {
                rbig_model* m = nullptr;
                check(rbig_fit(rbig_dataset_data(ds.get()), n, d, fit_flags.get(), &m));
                ModelPtr model(m);
                check(rbig_model_save(m, out.c_str()));
                std::printf("layers=%zu converged=%d\n", rbig_model_layer_count(m), rbig_trace_converged(m));
            } else {
                rbig_oneclass* m = nullptr;
                check(rbig_oneclass_fit(rbig_dataset_data(ds.get()), n, d, nu, oc_flags.get(), &m));
                OneClassPtr model(m);
                check(rbig_oneclass_save(m, out.c_str()));
                std::printf("log_threshold=%s nu=%s\n", fmt(rbig_oneclass_threshold(m)).c_str(), fmt(nu).c_str());
            }
        } else if (transform->parsed() || invert->parsed() || density->parsed()) {
            auto model = load_model(model_path);
            auto ds = load(in, header);
            const size_t n = rbig_dataset_rows(ds.get()), d = rbig_dataset_cols(ds.get());
            if (d != rbig_model_dim(model.get()))
                throw Failure{RBIG_ERR_SHAPE, "input has " + std::to_string(d) + " columns, model expects " + std::to_string(rbig_model_dim(model.get()))};
            if (density->parsed()) {
                std::vector<double> ld(n);
                check(rbig_log_density(model.get(), rbig_dataset_data(ds.get()), n, ld.data()));
                write(out, ld, n, 1, {"log_density"});
            } else {
                std::vector<double> y(n * d);
                if (transform->parsed()) check(rbig_transform(model.get(), rbig_dataset_data(ds.get()), n, y.data()));
                else check(rbig_inverse_transform(model.get(), rbig_dataset_data(ds.get()), n, y.data()));
                write(out, y, n, d);
            }
        } else if (sample->parsed()) {
            auto model = load_model(model_path);
            const size_t d = rbig_model_dim(model.get());
            std::vector<double> x(count * d);
            check(rbig_sample(model.get(), count, seed, x.data()));
            write(out, x, count, d);
        } else if (mi->parsed()) {
            auto ds = load(in, header);
            double bits = 0.0;
            check(rbig_multi_information(rbig_dataset_data(ds.get()), rbig_dataset_rows(ds.get()), rbig_dataset_cols(ds.get()), mi_flags.get(), &bits));
            std::printf("mi_bits=%s\n", fmt(bits).c_str());
        } else if (negentropy->parsed()) {
            auto ds = load(in, header);
            const size_t n = rbig_dataset_rows(ds.get()), d = rbig_dataset_cols(ds.get());
            std::string text = "column,negentropy_bits,low_confidence\n";
            std::vector<double> col(n);
            const double* data = rbig_dataset_data(ds.get());
            for (size_t j = 0; j < d; ++j) {
                for (size_t i = 0; i < n; ++i) col[i] = data[i * d + j];
                double b = 0.0;
                int low = 0;
                check(rbig_marginal_negentropy(col.data(), n, bins, &b, &low));
                const char* name = rbig_dataset_column_name(ds.get(), j);
                text += (name ? std::string(name) : std::to_string(j)) + "," + fmt(b) + "," + std::to_string(low) + "\n";
            }
            emit(out, text);
        } else if (gausstest->parsed()) {
            auto ds = load(in, header);
            rbig_gauss_verdict v{};
            check(rbig_gaussianity_test(rbig_dataset_data(ds.get()), rbig_dataset_rows(ds.get()), rbig_dataset_cols(ds.get()), alpha,
                                        resamples, seed, calibration_rows, &v));
            std::printf("statistic=%s threshold=%s alpha=%s accept=%d\n", fmt(v.statistic).c_str(), fmt(v.threshold).c_str(),
                        fmt(v.alpha).c_str(), v.accept);
        } else if (oc_score->parsed()) {
            rbig_oneclass* raw = nullptr;
            check(rbig_oneclass_load(model_path.c_str(), &raw));
            OneClassPtr model(raw);
            auto ds = load(in, header);
            const size_t n = rbig_dataset_rows(ds.get());
            std::vector<double> ld(n);
            std::vector<int> accept(n);
            check(rbig_oneclass_score(raw, rbig_dataset_data(ds.get()), n, ld.data(), accept.data()));
            std::vector<double> table(2 * n);
            for (size_t i = 0; i < n; ++i) {
                table[2 * i] = ld[i];
                table[2 * i + 1] = accept[i];
            }
            write(out, table, n, 2, {"log_density", "accept"});
        } else if (denoise->parsed()) {
            auto model = load_model(model_path);
            auto ds = load(in, header);
            const size_t n = rbig_dataset_rows(ds.get()), d = rbig_dataset_cols(ds.get());
            const auto sigma = parse_sigma(sigma_text, rbig_model_dim(model.get()));
            if (d != rbig_model_dim(model.get())) throw Failure{RBIG_ERR_SHAPE, "input column count does not match the model"};
            std::vector<double> x(n * d);
            check(rbig_denoise(model.get(), rbig_dataset_data(ds.get()), n, sigma.data(), n_posterior, seed, x.data(), nullptr));
            write(out, x, n, d);
        } else if (trace->parsed()) {
            auto model = load_model(model_path);
            std::string text = "iteration,jm_bits,cumulative_dj_bits,gauss_stat,gauss_accept\n";
            for (size_t i = 0; i < rbig_trace_length(model.get()); ++i) {
                rbig_trace_record r{};
                check(rbig_trace_get(model.get(), i, &r));
                text += std::to_string(r.iteration) + "," + fmt(r.jm_bits) + "," + fmt(r.cumulative_dj_bits) + "," + fmt(r.gauss_stat) + "," +
                        std::to_string(r.gauss_accept) + "\n";
            }
            emit(out, text);
        }
    } catch (const Failure& f) {
        std::fprintf(stderr, "error: code=%s status=%d message=\"%s\"\n", rbig_status_name(f.status), static_cast<int>(f.status), f.message.c_str());
        return 1;
    }
    return 0;
}
