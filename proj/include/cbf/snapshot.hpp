#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "cbf/dynamics.hpp"
#include "cbf/norms.hpp"
#include "cbf/verify.hpp"

namespace cbf {

// Binary field snapshot: little-endian header (u32 dim, u32 n, u32 component
// count) followed by the coefficients in flat mode order, components
// interleaved per mode as (re, im) doubles.

inline void write_snapshot(std::ostream& os, const SpectralField& u) {
    std::uint32_t header[3] = {static_cast<std::uint32_t>(u.grid.dim),
                               static_cast<std::uint32_t>(u.grid.n),
                               static_cast<std::uint32_t>(u.grid.dim)};
    os.write(reinterpret_cast<const char*>(header), sizeof(header));
    const std::size_t modes = u.modes();
    for (std::size_t flat = 0; flat < modes; ++flat) {
        for (int c = 0; c < u.grid.dim; ++c) {
            double re_im[2] = {u.at(c, flat).real(), u.at(c, flat).imag()};
            os.write(reinterpret_cast<const char*>(re_im), sizeof(re_im));
        }
    }
}

inline void write_snapshot(const std::string& path, const SpectralField& u) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open snapshot file: " + path);
    write_snapshot(os, u);
    if (!os) throw std::runtime_error("snapshot write failed: " + path);
}

inline SpectralField read_snapshot(std::istream& is) {
    std::uint32_t header[3];
    is.read(reinterpret_cast<char*>(header), sizeof(header));
    if (!is) throw std::runtime_error("snapshot header truncated");
    TorusGrid grid;
    grid.dim = static_cast<int>(header[0]);
    grid.n = static_cast<int>(header[1]);
    grid.validate();
    if (header[2] != static_cast<std::uint32_t>(grid.dim))
        throw std::runtime_error("snapshot component count does not match dim");
    SpectralField u(grid);
    const std::size_t modes = u.modes();
    for (std::size_t flat = 0; flat < modes; ++flat) {
        for (int c = 0; c < grid.dim; ++c) {
            double re_im[2];
            is.read(reinterpret_cast<char*>(re_im), sizeof(re_im));
            u.at(c, flat) = Complex{re_im[0], re_im[1]};
        }
    }
    if (!is) throw std::runtime_error("snapshot payload truncated");
    return u;
}

inline SpectralField read_snapshot(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open snapshot file: " + path);
    return read_snapshot(is);
}

// ---------------------------------------------------------------------------
// CSV exports (fixed %.17g formatting keeps outputs byte-identical per seed)
// ---------------------------------------------------------------------------

inline std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_norm_report_csv(std::ostream& os, const NormReport& r) {
    os << "h_norm,v_norm,grad_norm,da_norm,linf_norm";
    for (const auto& [p, v] : r.lp_norms) os << ",lp_" << csv_num(p);
    os << "\n";
    os << csv_num(r.h_norm) << "," << csv_num(r.v_norm) << "," << csv_num(r.grad_norm) << ","
       << csv_num(r.da_norm) << "," << csv_num(r.linf_norm);
    for (const auto& [p, v] : r.lp_norms) os << "," << csv_num(v);
    os << "\n";
}

/// time, ||Z||_H, ||Z||_V, ||Z||_{L^{r+1}}, per-step weak balance residual.
/// Comment lines carry the resolved run configuration.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                                 const std::vector<std::string>& header_lines = {}) {
    for (const std::string& line : header_lines) os << "# " << line << "\n";
    os << "time,h_norm,v_norm,lr1_norm,balance_residual\n";
    BalanceResiduals res = balance_residuals(traj);
    double rp1 = traj.params.r.r + 1.0;
    for (std::size_t i = 0; i < traj.nodes(); ++i) {
        const StepDiagnostics& d = traj.diag[i];
        double bal = i == 0 ? 0.0 : res.weak[i - 1];
        os << csv_num(traj.times[i]) << "," << csv_num(std::sqrt(d.h2)) << ","
           << csv_num(std::sqrt(d.h2 + d.grad2)) << "," << csv_num(std::pow(d.lp_rp1, 1.0 / rp1))
           << "," << csv_num(bal) << "\n";
    }
}

inline void write_signal_csv(std::ostream& os, const ControlSignal& sig) {
    os << "breakpoint,label\n";
    for (std::size_t i = 0; i < sig.labels.size(); ++i)
        os << csv_num(sig.breakpoints[i]) << "," << sig.labels[i] << "\n";
    os << csv_num(sig.breakpoints.back()) << ",\n";
}

}  // namespace cbf
