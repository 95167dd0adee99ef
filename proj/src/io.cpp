#include "mfg/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <fftw3.h>

#include "mfg/rng.hpp"

namespace mfg {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_text(const std::string& path, const std::string& content) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
}

namespace {

std::string node_header(int d) {
    std::string h = "t";
    for (int i = 0; i < d; ++i) h += ",i" + std::to_string(i);
    return h + ",value\n";
}

void node_prefix(std::ostringstream& os, std::size_t t, const Torus& g, std::size_t x) {
    os << t;
    const auto c = g.coords(x);
    for (int i = 0; i < g.dim(); ++i) os << ',' << c[i];
}

}  // namespace

std::string scalar_series_csv(const ScalarSeries& series) {
    if (series.empty()) return "t,value\n";
    const Torus& g = series.front().torus();
    std::ostringstream os;
    os << node_header(g.dim());
    for (std::size_t t = 0; t < series.size(); ++t) {
        for (std::size_t x = 0; x < g.size(); ++x) {
            node_prefix(os, t, g, x);
            os << ',' << format_double(series[t][x]) << '\n';
        }
    }
    return os.str();
}

std::string vector_component_csv(const VectorSeries& series, int component) {
    if (series.empty()) return "t,value\n";
    const Torus& g = series.front().torus();
    std::ostringstream os;
    os << node_header(g.dim());
    for (std::size_t t = 0; t < series.size(); ++t) {
        for (std::size_t x = 0; x < g.size(); ++x) {
            node_prefix(os, t, g, x);
            os << ',' << format_double(series[t].at(x, component)) << '\n';
        }
    }
    return os.str();
}

std::string diagnostics_csv(const std::vector<FpStepDiagnostics>& diag, const std::vector<std::size_t>& active) {
    std::ostringstream os;
    os << "t,mass,min_m,max_abs_v,active_truncation\n";
    for (std::size_t i = 0; i < diag.size(); ++i) {
        const auto& r = diag[i];
        os << r.t << ',' << format_double(r.mass) << ',' << format_double(r.min_m) << ','
           << format_double(r.max_abs_v) << ',' << (i < active.size() ? active[i] : 0) << '\n';
    }
    return os.str();
}

std::string iteration_log_csv(const std::vector<IterationRecord>& history) {
    std::ostringstream os;
    os << "k,omega,residual,max_abs_v,min_m\n";
    for (const auto& r : history) {
        os << r.k << ',' << format_double(r.omega) << ',' << format_double(r.residual) << ','
           << format_double(r.max_abs_v) << ',' << format_double(r.min_m) << '\n';
    }
    return os.str();
}

std::string manifest_text(const Manifest& m) {
    std::ostringstream os;
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(m.config_hash));
    os << "config_hash=" << hash << '\n';
    os << "seed=" << m.seed << '\n';
    os << "generator=" << CounterRng::kGeneratorId << '\n';
    os << "artifact=" << kArtifactVersion << '\n';
    os << "fftw=" << fftw_version << '\n';
    for (const auto& [k, v] : m.extra) os << k << '=' << v << '\n';
    return os.str();
}

void write_solution(const std::string& dir, const MfgSolution& sol) {
    const std::filesystem::path base(dir);
    write_text((base / "u.csv").string(), scalar_series_csv(sol.u));
    write_text((base / "m.csv").string(), scalar_series_csv(sol.m));
    const int d = sol.v.empty() ? 0 : sol.v.front().dim();
    for (int i = 0; i < d; ++i) {
        write_text((base / ("v_" + std::to_string(i) + ".csv")).string(), vector_component_csv(sol.v, i));
    }
    write_text((base / "diagnostics.csv").string(), diagnostics_csv(sol.diagnostics, sol.active_truncation));
    write_text((base / "iterations.csv").string(), iteration_log_csv(sol.history));
}

}  // namespace mfg
