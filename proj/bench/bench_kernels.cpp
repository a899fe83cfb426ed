// Serial reference vs OpenMP kernels: neighbour search, forest training, batch prediction.
#include <chrono>
#include <cstdio>
#include <numeric>

#include <omp.h>

#include "CLI11.hpp"
#include "gridids/forest.hpp"
#include "gridids/neighbors.hpp"
#include "support.hpp"

using namespace gridids;

namespace {

template <class F>
double best_of(int repeat, F&& f) {
  double best = 1e300;
  for (int i = 0; i < repeat; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void line(const char* kernel, double serial, double parallel, bool same) {
  std::printf("%-14s serial %9.4f s  parallel %9.4f s  speedup %5.2fx  %s\n", kernel, serial, parallel,
              serial / parallel, same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t rows = 4000, features = 24, classes = 8, trees = 60;
  int repeat = 3;
  CLI::App app{"kernel benchmark"};
  app.add_option("--rows", rows);
  app.add_option("--features", features);
  app.add_option("--classes", classes);
  app.add_option("--trees", trees);
  app.add_option("--repeat", repeat);
  CLI11_PARSE(app, argc, argv);

  Rng r(5);
  std::vector<std::vector<double>> centers(classes, std::vector<double>(features));
  for (auto& c : centers)
    for (auto& v : c) v = 2.0 * r.normal();
  const auto data = testing::blobs(centers, std::vector<std::size_t>(classes, rows / classes), 1.0, 6);
  std::printf("rows %zu features %zu classes %zu trees %zu threads %d\n", data.rows(), features, classes, trees,
              omp_get_max_threads());

  std::vector<std::size_t> queries(data.rows());
  std::iota(queries.begin(), queries.end(), std::size_t{0});
  std::vector<NeighborIndex> ns, np;
  const double kn_s = best_of(repeat, [&] { ns = k_nearest_batch_serial(data.values, queries, 5); });
  const double kn_p = best_of(repeat, [&] { np = k_nearest_batch(data.values, queries, 5); });
  bool same = ns.size() == np.size();
  for (std::size_t i = 0; same && i < ns.size(); ++i) same = ns[i].neighbors == np[i].neighbors;
  line("k_nearest", kn_s, kn_p, same);

  ForestParams p;
  p.n_estimators = trees;
  p.seed = 7;
  Forest fs, fp;
  const double tr_s = best_of(repeat, [&] { fs = train_forest_serial(data, p); });
  const double tr_p = best_of(repeat, [&] { fp = train_forest(data, p); });
  line("train_forest", tr_s, tr_p, fs == fp);

  std::vector<int> ps, pp;
  const double pr_s = best_of(repeat, [&] { ps = fs.predict_batch_serial(data.values); });
  const double pr_p = best_of(repeat, [&] { pp = fs.predict_batch(data.values); });
  line("predict_batch", pr_s, pr_p, ps == pp);
  return same && fs == fp && ps == pp ? 0 : 1;
}
