#include "nalab/lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace nalab {

namespace {

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path);
    return f;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};

}  // namespace

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    auto f = open_out(path);
    for (std::size_t i = 0; i < header.size(); ++i) f << (i ? "," : "") << header[i];
    f << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << fmt17(row[i]);
        f << '\n';
    }
}

void write_svg(const std::string& path, const std::string& title, const std::string& x_label,
               const std::vector<Series>& series, bool log_y) {
    const double W = 800, H = 480, L = 70, R = 170, Tm = 40, B = 50;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    auto ymap = [&](double y) { return log_y ? std::log10(y) : y; };
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            if (!std::isfinite(y) || (log_y && y <= 0.0)) continue;
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, ymap(y));
            y1 = std::max(y1, ymap(y));
        }
    }
    if (!(x1 > x0)) x1 = x0 + 1.0;
    if (!(y1 > y0)) y1 = y0 + 1.0;
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (ymap(y) - y0) / (y1 - y0) * (H - Tm - B); };

    auto f = open_out(path);
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    f << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
      << title << "</text>\n";
    f << "<rect x=\"" << L << "\" y=\"" << Tm << "\" width=\"" << W - L - R << "\" height=\"" << H - Tm - B
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = x0 + i * (x1 - x0) / 4, yv = y0 + i * (y1 - y0) / 4;
        f << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 18
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << fmt_short(xv) << "</text>\n";
        const double ypix = H - B - (yv - y0) / (y1 - y0) * (H - Tm - B);
        f << "<text x=\"" << L - 6 << "\" y=\"" << ypix + 4
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
          << (log_y ? "1e" + fmt_short(yv) : fmt_short(yv)) << "</text>\n";
    }
    f << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << x_label << "</text>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const char* color = kPalette[k % std::size(kPalette)];
        f << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
        for (const auto& [x, y] : series[k].points) {
            if (!std::isfinite(y) || (log_y && y <= 0.0)) continue;
            f << px(x) << ',' << py(y) << ' ';
        }
        f << "\"/>\n";
        f << "<text x=\"" << W - R + 10 << "\" y=\"" << Tm + 16 * (k + 1) << "\" fill=\"" << color
          << "\" font-family=\"sans-serif\" font-size=\"12\">" << series[k].label << "</text>\n";
    }
    f << "</svg>\n";
}

void write_boundary_csv(const std::string& path, const BoundaryTrajectory& bt, const Basis& basis) {
    auto f = open_out(path);
    const int n = bt.samples.empty() ? 0 : bt.samples.front().b.size();
    f << "t,sup_norm,principal_coeff,residual,converged,anchor";
    for (int k = 0; k < n; ++k) f << ",c" << k;
    f << '\n';
    // Only t, the flags and the coefficients are read back; the norms are for readers.
    std::size_t a = 0;
    for (const auto& s : bt.samples) {
        const bool anchor = a < bt.anchor_times.size() && bt.anchor_times[a] == s.t;
        if (anchor) ++a;
        f << fmt17(s.t) << ',' << fmt17(sup_norm(basis, s.b)) << ',' << fmt17(s.b.coeffs(0)) << ','
          << fmt17(s.residual) << ',' << (s.converged ? 1 : 0) << ',' << (anchor ? 1 : 0);
        for (int k = 0; k < n; ++k) f << ',' << fmt17(s.b.coeffs(k));
        f << '\n';
    }
    f << "# params," << fmt17(bt.params.r) << ',' << fmt17(bt.params.t0) << ',' << fmt17(bt.params.tol) << ','
      << bt.params.n_max << ',' << fmt17(bt.params.min_depth) << ',' << fmt17(bt.dt_sample) << '\n';
}

BoundaryTrajectory read_boundary_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + path);
    BoundaryTrajectory bt;
    std::string line;
    std::getline(f, line);
    const int n = static_cast<int>(std::count(line.begin(), line.end(), ',')) - 5;
    if (n < 1) throw std::runtime_error("malformed boundary file " + path);
    bool have_params = false;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.front() == "# params") {
            if (cells.size() != 7) throw std::runtime_error("malformed params line in " + path);
            bt.params.r = std::stod(cells[1]);
            bt.params.t0 = std::stod(cells[2]);
            bt.params.tol = std::strtod(cells[3].c_str(), nullptr);
            bt.params.n_max = std::stoi(cells[4]);
            bt.params.min_depth = std::stod(cells[5]);
            bt.dt_sample = std::stod(cells[6]);
            have_params = true;
            continue;
        }
        if (static_cast<int>(cells.size()) != n + 6) throw std::runtime_error("malformed row in " + path);
        BoundarySample s;
        s.t = std::stod(cells[0]);
        s.residual = std::strtod(cells[3].c_str(), nullptr);
        s.converged = cells[4] == "1";
        if (cells[5] == "1") bt.anchor_times.push_back(s.t);
        s.b = State::zero(n);
        for (int k = 0; k < n; ++k) s.b.coeffs(k) = std::strtod(cells[6 + k].c_str(), nullptr);
        bt.samples.push_back(std::move(s));
    }
    if (!have_params) throw std::runtime_error("truncated boundary file " + path);
    return bt;
}

}  // namespace nalab
