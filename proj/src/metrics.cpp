#include "vibgan/metrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace vibgan {

namespace {

void require_same_length(const std::vector<double>& x,
                         const std::vector<double>& g) {
  if (x.size() != g.size()) {
    throw DimensionError("segment length mismatch: " +
                         std::to_string(x.size()) + " vs " +
                         std::to_string(g.size()));
  }
  if (x.size() < 2) {
    throw DimensionError("segments must have >= 2 samples");
  }
}

double vec_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Sample variance (n-1), matching the covariance convention of the
// multivariate form.
double vec_var(const std::vector<double>& v, double mean) {
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / static_cast<double>(v.size() - 1);
}

// R-7 linear interpolation quantile on sorted data.
double quantile_sorted(const std::vector<double>& sorted, double q) {
  double pos = q * static_cast<double>(sorted.size() - 1);
  size_t lo = static_cast<size_t>(pos);
  size_t hi = std::min(lo + 1, sorted.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

double fid_pair(const std::vector<double>& x, const std::vector<double>& g) {
  require_same_length(x, g);
  double mx = vec_mean(x), mg = vec_mean(g);
  double cx = vec_var(x, mx), cg = vec_var(g, mg);
  double dm = mx - mg;
  // (dm)^2 + cx + cg - 2 sqrt(cx cg) == (dm)^2 + (sqrt(cx)-sqrt(cg))^2
  return dm * dm + cx + cg - 2.0 * std::sqrt(cx * cg);
}

double fid_pair(const Segment& x, const Segment& g) {
  return fid_pair(x.values, g.values);
}

double fid_multivariate(const std::vector<Segment>& x_set,
                        const std::vector<Segment>& g_set, int64_t dim) {
  if (dim < 1) throw ParameterError("fid_multivariate: dim must be >= 1");

  auto pool = [dim](const std::vector<Segment>& set) {
    std::vector<Eigen::VectorXd> rows;
    for (const Segment& s : set) {
      int64_t windows = s.length() / dim;
      for (int64_t w = 0; w < windows; ++w) {
        Eigen::VectorXd row(dim);
        for (int64_t k = 0; k < dim; ++k) {
          row(k) = s.values[static_cast<size_t>(w * dim + k)];
        }
        rows.push_back(std::move(row));
      }
    }
    return rows;
  };

  auto fit_gaussian = [dim](const std::vector<Eigen::VectorXd>& rows,
                            Eigen::VectorXd& mu, Eigen::MatrixXd& cov) {
    int64_t n = static_cast<int64_t>(rows.size());
    if (n < 2) {
      throw ParameterError(
          "fid_multivariate: not enough windows to estimate covariance");
    }
    mu = Eigen::VectorXd::Zero(dim);
    for (const auto& r : rows) mu += r;
    mu /= static_cast<double>(n);
    cov = Eigen::MatrixXd::Zero(dim, dim);
    for (const auto& r : rows) {
      Eigen::VectorXd d = r - mu;
      cov += d * d.transpose();
    }
    cov /= static_cast<double>(n - 1);
  };

  Eigen::VectorXd mu_x, mu_g;
  Eigen::MatrixXd cov_x, cov_g;
  fit_gaussian(pool(x_set), mu_x, cov_x);
  fit_gaussian(pool(g_set), mu_g, cov_g);

  auto psd_sqrt = [](const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success) {
      throw NumericalError("fid_multivariate: eigensolve failed");
    }
    Eigen::VectorXd ev = es.eigenvalues();
    double radius = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
    double tol = 1e-8 * std::max(radius, 1e-300);
    for (int i = 0; i < ev.size(); ++i) {
      if (ev(i) < -tol) {
        throw NumericalError("fid_multivariate: matrix is not PSD (eigenvalue " +
                             std::to_string(ev(i)) + ")");
      }
      ev(i) = std::sqrt(std::max(ev(i), 0.0));
    }
    return Eigen::MatrixXd(es.eigenvectors() * ev.asDiagonal() *
                           es.eigenvectors().transpose());
  };

  // Tr((Cx Cg)^{1/2}) via the symmetrized product, which shares its
  // spectrum with Cx Cg but stays symmetric PSD.
  Eigen::MatrixXd sx = psd_sqrt(cov_x);
  Eigen::MatrixXd inner = sx * cov_g * sx;
  inner = 0.5 * (inner + inner.transpose());  // squash asymmetry drift
  Eigen::MatrixXd sqrt_inner = psd_sqrt(inner);

  double mean_term = (mu_x - mu_g).squaredNorm();
  double trace_term =
      cov_x.trace() + cov_g.trace() - 2.0 * sqrt_inner.trace();
  return mean_term + trace_term;
}

double ssim(const std::vector<double>& x, const std::vector<double>& g,
            const SsimOptions& opts) {
  require_same_length(x, g);
  size_t n = x.size();
  double mx = vec_mean(x), mg = vec_mean(g);
  double vx = vec_var(x, mx), vg = vec_var(g, mg);
  double cov = 0.0;
  for (size_t i = 0; i < n; ++i) cov += (x[i] - mx) * (g[i] - mg);
  cov /= static_cast<double>(n - 1);

  double range;
  if (opts.range_mode == SsimRangeMode::fixed) {
    range = opts.fixed_range;
  } else {
    auto [xmn, xmx] = std::minmax_element(x.begin(), x.end());
    auto [gmn, gmx] = std::minmax_element(g.begin(), g.end());
    range = std::max(*xmx, *gmx) - std::min(*xmn, *gmn);
  }
  if (range == 0.0) return 1.0;  // both constant and equal

  double c1 = opts.k1 * range;
  c1 *= c1;
  double c2 = opts.k2 * range;
  c2 *= c2;

  double num = (2.0 * mx * mg + c1) * (2.0 * cov + c2);
  double den = (mx * mx + mg * mg + c1) * (vx + vg + c2);
  return num / den;
}

double ssim(const Segment& x, const Segment& g, const SsimOptions& opts) {
  return ssim(x.values, g.values, opts);
}

double HistogramPdf::mode_center() const {
  if (bins.empty()) return 0.0;
  size_t best = 0;
  for (size_t i = 1; i < bins.size(); ++i) {
    double di = bins[i].hi > bins[i].lo ? bins[i].density : bins[i].mass;
    double db = bins[best].hi > bins[best].lo ? bins[best].density
                                              : bins[best].mass;
    if (di > db) best = i;
  }
  return 0.5 * (bins[best].lo + bins[best].hi);
}

HistogramPdf histogram_pdf(const std::vector<double>& values, int bins) {
  if (values.empty()) throw ParameterError("histogram_pdf: empty input");
  if (bins < 1) throw ParameterError("histogram_pdf: bins must be >= 1");

  auto [mn_it, mx_it] = std::minmax_element(values.begin(), values.end());
  double mn = *mn_it, mx = *mx_it;
  double n = static_cast<double>(values.size());

  HistogramPdf pdf;
  if (mn == mx) {
    // All values identical: a single degenerate bin carrying all mass.
    HistogramPdf::Bin bin;
    bin.lo = bin.hi = mn;
    bin.count = static_cast<int64_t>(values.size());
    bin.mass = 1.0;
    bin.density = 0.0;
    pdf.bins.push_back(bin);
    return pdf;
  }

  double width = (mx - mn) / bins;
  pdf.bins.resize(static_cast<size_t>(bins));
  for (int i = 0; i < bins; ++i) {
    pdf.bins[static_cast<size_t>(i)].lo = mn + i * width;
    pdf.bins[static_cast<size_t>(i)].hi = mn + (i + 1) * width;
  }
  pdf.bins.back().hi = mx;
  for (double v : values) {
    int idx = static_cast<int>((v - mn) / width);
    idx = std::clamp(idx, 0, bins - 1);  // max value lands in the last bin
    pdf.bins[static_cast<size_t>(idx)].count++;
  }
  for (auto& b : pdf.bins) {
    b.mass = static_cast<double>(b.count) / n;
    b.density = b.mass / width;
  }
  return pdf;
}

KdeCurve gaussian_kde(const std::vector<double>& values, int points) {
  if (values.empty()) throw ParameterError("gaussian_kde: empty input");
  if (points < 2) throw ParameterError("gaussian_kde: points must be >= 2");

  double m = vec_mean(values);
  double sd = values.size() > 1 ? std::sqrt(vec_var(values, m)) : 0.0;
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  double sigma = sd;
  if (iqr > 0.0) sigma = std::min(sd, iqr / 1.34);
  double bw = 0.9 * sigma *
              std::pow(static_cast<double>(values.size()), -0.2);
  if (bw <= 0.0) bw = std::max(1e-3 * std::max(std::abs(m), 1.0), 1e-12);

  double lo = sorted.front() - 3.0 * bw;
  double hi = sorted.back() + 3.0 * bw;
  KdeCurve curve;
  curve.bandwidth = bw;
  curve.x.resize(static_cast<size_t>(points));
  curve.density.resize(static_cast<size_t>(points));
  const double norm =
      1.0 / (static_cast<double>(values.size()) * bw * std::sqrt(2.0 * M_PI));
  for (int i = 0; i < points; ++i) {
    double xv = lo + (hi - lo) * i / (points - 1);
    double acc = 0.0;
    for (double v : values) {
      double z = (xv - v) / bw;
      acc += std::exp(-0.5 * z * z);
    }
    curve.x[static_cast<size_t>(i)] = xv;
    curve.density[static_cast<size_t>(i)] = acc * norm;
  }
  return curve;
}

SummaryStats summarize(const std::vector<double>& scores,
                       const HistogramPdf& pdf) {
  SummaryStats s;
  s.mean = vec_mean(scores);
  s.variance = scores.size() > 1 ? vec_var(scores, s.mean) : 0.0;
  s.pdf_mode = pdf.mode_center();
  return s;
}

EvalReport creativity_report(const std::vector<Segment>& gen,
                             const std::vector<Segment>& real_segments,
                             double threshold, int bins,
                             const SsimOptions& opts) {
  if (gen.empty() || real_segments.empty()) {
    throw ParameterError("creativity_report: empty inputs");
  }
  EvalReport report;
  report.kind = "creativity";
  report.threshold = threshold;
  report.scores.reserve(gen.size() * real_segments.size());
  for (size_t gi = 0; gi < gen.size(); ++gi) {
    for (size_t ri = 0; ri < real_segments.size(); ++ri) {
      double score = ssim(gen[gi], real_segments[ri], opts);
      report.scores.push_back(score);
      if (score > threshold) {
        report.duplicates.push_back({static_cast<int64_t>(gi),
                                     static_cast<int64_t>(ri), score});
      }
    }
  }
  report.pdf = histogram_pdf(report.scores, bins);
  report.summary = summarize(report.scores, report.pdf);
  return report;
}

EvalReport diversity_report(const std::vector<Segment>& gen, double threshold,
                            int bins, const SsimOptions& opts) {
  if (gen.size() < 2) {
    throw ParameterError("diversity_report: needs >= 2 segments");
  }
  EvalReport report;
  report.kind = "diversity";
  report.threshold = threshold;
  report.scores.reserve(gen.size() * (gen.size() - 1) / 2);
  for (size_t i = 0; i < gen.size(); ++i) {
    for (size_t j = i + 1; j < gen.size(); ++j) {
      double score = ssim(gen[i], gen[j], opts);
      report.scores.push_back(score);
      if (score > threshold) {
        report.duplicates.push_back({static_cast<int64_t>(i),
                                     static_cast<int64_t>(j), score});
      }
    }
  }
  report.pdf = histogram_pdf(report.scores, bins);
  report.summary = summarize(report.scores, report.pdf);
  return report;
}

BoxStats box_stats(const std::vector<double>& values) {
  if (values.empty()) throw ParameterError("box_stats: empty input");
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());

  BoxStats s;
  s.min = sorted.front();
  s.max = sorted.back();
  s.q1 = quantile_sorted(sorted, 0.25);
  s.median = quantile_sorted(sorted, 0.50);
  s.q3 = quantile_sorted(sorted, 0.75);

  double iqr = s.q3 - s.q1;
  double fence_lo = s.q1 - 1.5 * iqr;
  double fence_hi = s.q3 + 1.5 * iqr;
  s.whisker_low = s.q1;
  s.whisker_high = s.q3;
  for (double v : sorted) {
    if (v >= fence_lo) {
      s.whisker_low = v;
      break;
    }
  }
  for (auto it = sorted.rbegin(); it != sorted.rend(); ++it) {
    if (*it <= fence_hi) {
      s.whisker_high = *it;
      break;
    }
  }
  for (double v : sorted) {
    if (v < fence_lo || v > fence_hi) s.outliers.push_back(v);
  }
  return s;
}

}  // namespace vibgan
