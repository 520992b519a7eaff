// Quantitative evaluation of generated signals: Frechet-style distance
// on segment statistics (scalar per-pair and multivariate forms), global
// SSIM, creativity/diversity duplicate screens, box statistics, and
// histogram/KDE densities.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vibgan/rng.hpp"
#include "vibgan/signal.hpp"

namespace vibgan {

// Scalar statistics form: (mu_x - mu_g)^2 + (sqrt(c_x) - sqrt(c_g))^2
// with sample variances. Lower is more similar; 0 iff the segments
// share mean and variance.
double fid_pair(const std::vector<double>& x, const std::vector<double>& g);
double fid_pair(const Segment& x, const Segment& g);

// Full covariance form over dim-length windows pooled from each set:
// ||mu_x - mu_g||^2 + Tr(Cx + Cg - 2 (Cx Cg)^{1/2}).
double fid_multivariate(const std::vector<Segment>& x_set,
                        const std::vector<Segment>& g_set, int64_t dim);

enum class SsimRangeMode { union_range, fixed };

struct SsimOptions {
  double k1 = 0.01;
  double k2 = 0.03;
  SsimRangeMode range_mode = SsimRangeMode::union_range;
  double fixed_range = 2.0;  // used when range_mode == fixed
};

double ssim(const std::vector<double>& x, const std::vector<double>& g,
            const SsimOptions& opts = {});
double ssim(const Segment& x, const Segment& g, const SsimOptions& opts = {});

struct HistogramPdf {
  struct Bin {
    double lo = 0.0;
    double hi = 0.0;
    int64_t count = 0;
    double mass = 0.0;     // count / n, sums to 1
    double density = 0.0;  // mass / width (0 for a degenerate bin)
  };
  std::vector<Bin> bins;

  double mode_center() const;
};

HistogramPdf histogram_pdf(const std::vector<double>& values, int bins);

struct KdeCurve {
  std::vector<double> x;
  std::vector<double> density;
  double bandwidth = 0.0;
};

// Gaussian kernel, Silverman bandwidth.
KdeCurve gaussian_kde(const std::vector<double>& values, int points = 200);

struct SummaryStats {
  double mean = 0.0;
  double variance = 0.0;
  double pdf_mode = 0.0;
};

struct DuplicatePair {
  int64_t first = 0;
  int64_t second = 0;
  double score = 0.0;
};

struct EvalReport {
  std::string kind;  // "creativity" | "diversity" | "fid"
  std::vector<double> scores;
  SummaryStats summary;
  HistogramPdf pdf;
  double threshold = 0.8;
  std::vector<DuplicatePair> duplicates;
};

// SSIM of every (generated, real) pair; pairs above the threshold are
// flagged as duplicates of real data.
EvalReport creativity_report(const std::vector<Segment>& gen,
                             const std::vector<Segment>& real_segments,
                             double threshold = 0.8, int bins = 40,
                             const SsimOptions& opts = {});

// SSIM over distinct unordered pairs within the generated set.
EvalReport diversity_report(const std::vector<Segment>& gen,
                            double threshold = 0.8, int bins = 40,
                            const SsimOptions& opts = {});

struct BoxStats {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double whisker_low = 0.0;
  double whisker_high = 0.0;
  std::vector<double> outliers;
};

// Quartiles by linear interpolation; whiskers at the most extreme
// values within 1.5 IQR of the quartiles.
BoxStats box_stats(const std::vector<double>& values);

SummaryStats summarize(const std::vector<double>& scores,
                       const HistogramPdf& pdf);

}  // namespace vibgan
