#include "hsic/arch_search.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

#include "hsic/metrics.hpp"

namespace hsic {

void Budget::validate() const {
  if (!(target_bpppb > 0.0)) throw ValidationError("budget: target_bpppb must be > 0");
  if (bits_per_param != 32 && bits_per_param != 16 && bits_per_param != 8)
    throw ValidationError("budget: bits_per_param must be 32, 16, or 8");
  if (rows < 1 || cols < 1 || bands < 1)
    throw ValidationError("budget: cube dimensions must be >= 1");
}

std::int64_t Budget::max_params() const {
  validate();
  return static_cast<std::int64_t>(
      std::floor(target_bpppb * rows * cols * bands / bits_per_param));
}

std::vector<SirenConfig> enumerate_candidates(const Budget& budget,
                                              const SearchSpace& space) {
  budget.validate();
  if (space.depths.empty()) throw ValidationError("search space: no depths");
  if (space.width_min < 1 || space.width_max < space.width_min)
    throw ValidationError("search space: bad width range");

  const std::int64_t cap = budget.max_params();

  std::vector<int> depths = space.depths;
  std::sort(depths.begin(), depths.end());
  depths.erase(std::unique(depths.begin(), depths.end()), depths.end());

  std::vector<SirenConfig> out;
  for (int d : depths) {
    if (d < 1) throw ValidationError("search space: depth must be >= 1");
    SirenConfig c;
    c.hidden_layers = d;
    c.out_dim = budget.bands;

    c.hidden_width = space.width_min;
    if (param_count(c) > cap) continue;
    // param_count is monotone in width, so binary search the largest fit.
    int lo = space.width_min, hi = space.width_max;
    while (lo < hi) {
      const int mid = lo + (hi - lo + 1) / 2;
      c.hidden_width = mid;
      if (param_count(c) <= cap)
        lo = mid;
      else
        hi = mid - 1;
    }
    c.hidden_width = lo;
    if (param_count(c) * 2 < cap) continue;  // wasteful: under half the budget
    out.push_back(c);
  }
  if (out.empty())
    throw ValidationError("no architecture fits the budget of " +
                          std::to_string(cap) + " parameters");
  std::stable_sort(out.begin(), out.end(), [](const SirenConfig& a, const SirenConfig& b) {
    return param_count(a) > param_count(b);
  });
  return out;
}

unsigned max_threads() {
  if (const char* env = std::getenv("HSIC_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

std::size_t select_best(const std::vector<ProbeResult>& report) {
  if (report.empty()) throw ValidationError("select_best: empty report");
  const auto key = [](const ProbeResult& r) {
    return std::make_tuple(-r.probe_psnr, r.params, r.config.hidden_layers, r.lr);
  };
  std::size_t best = 0;
  for (std::size_t i = 1; i < report.size(); ++i)
    if (key(report[i]) < key(report[best])) best = i;
  return best;
}

SearchResult search(const HyperCube& normalized_cube, const Budget& budget,
                    const SearchSpace& space, std::uint64_t seed) {
  const std::vector<SirenConfig> candidates = enumerate_candidates(budget, space);
  std::vector<double> lrs = space.lrs;
  std::sort(lrs.begin(), lrs.end());
  if (lrs.empty()) throw ValidationError("search space: no learning rates");

  struct Job {
    SirenConfig config;
    double lr;
  };
  std::vector<Job> jobs;
  for (const auto& c : candidates)
    for (double lr : lrs) jobs.push_back({c, lr});

  auto run_probe = [&](const Job& job) {
    TrainSettings ts;
    ts.iterations = space.probe_iterations;
    ts.lr = job.lr;
    ts.seed = seed;
    const OverfitResult r = overfit(normalized_cube, job.config, ts);
    ProbeResult pr;
    pr.config = job.config;
    pr.lr = job.lr;
    pr.params = param_count(job.config);
    pr.bpppb = bpppb(pr.params, budget.bits_per_param, budget.rows, budget.cols,
                     budget.bands);
    pr.probe_psnr = r.best_psnr;
    return pr;
  };

  // Probes run in waves of max_threads(); the report keeps canonical order.
  std::vector<ProbeResult> report(jobs.size());
  const unsigned threads = std::min<std::size_t>(max_threads(), jobs.size());
  if (threads <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) report[i] = run_probe(jobs[i]);
  } else {
    for (std::size_t base = 0; base < jobs.size(); base += threads) {
      std::vector<std::future<ProbeResult>> wave;
      const std::size_t end = std::min(jobs.size(), base + threads);
      for (std::size_t i = base; i < end; ++i)
        wave.push_back(std::async(std::launch::async, run_probe, std::cref(jobs[i])));
      for (std::size_t i = base; i < end; ++i) report[i] = wave[i - base].get();
    }
  }

  const std::size_t best = select_best(report);

  SearchResult result;
  result.best = report[best].config;
  result.best_lr = report[best].lr;
  result.report = std::move(report);
  return result;
}

std::string search_csv_header() {
  return "hidden_layers,hidden_width,omega0,lr,param_count,bpppb,probe_psnr";
}

std::string search_csv_row(const ProbeResult& r) {
  std::ostringstream os;
  os.precision(17);
  os << r.config.hidden_layers << ',' << r.config.hidden_width << ',' << r.config.omega0
     << ',' << r.lr << ',' << r.params << ',' << r.bpppb << ','
     << format_psnr(r.probe_psnr);
  return os.str();
}

void write_search_csv(const std::vector<ProbeResult>& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << search_csv_header() << '\n';
  for (const auto& r : report) out << search_csv_row(r) << '\n';
}

}  // namespace hsic
