// Times the cell integration serially and with the OpenMP worker pool on a
// fixed workload and checks the two reductions agree bit for bit.
#include <chrono>
#include <cstdio>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mdl/characters.hpp"
#include "mdl/integrator.hpp"

using namespace mdl;

namespace {

double time_once(const std::vector<BoundedSequence>& seqs, const SPoint& p,
                 const TruncationPlan& plan, Parallel par, cplx* out) {
  const auto t0 = std::chrono::steady_clock::now();
  *out = integrate_cells(seqs, p, plan, par);
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

} // namespace

int main(int argc, char** argv) {
  bool quick = false;
  for (int i = 1; i < argc; ++i)
    if (std::strcmp(argv[i], "--quick") == 0) quick = true;

  const auto chi4 = BoundedSequence::character(DirichletCharacter(4, {1}));

  struct Case {
    const char* name;
    SPoint p;
    std::vector<BoundedSequence> seqs;
    TruncationPlan plan;
  };
  std::vector<Case> cases;
  cases.push_back({"r=1 s=1",
                   SPoint({cplx(1.0, 0.0)}),
                   {chi4},
                   {{quick ? 20'000u : 200'000u}, 8}});
  cases.push_back({"r=2 s=(2,2)",
                   SPoint({cplx(2.0, 0.0), cplx(2.0, 0.0)}),
                   {chi4, chi4},
                   {{quick ? 200u : 800u, quick ? 400u : 1600u}, 8}});
  cases.push_back({"r=2 s=(0.5,0.7)",
                   SPoint({cplx(0.5, 0.0), cplx(0.7, 0.0)}),
                   {chi4, chi4},
                   {{quick ? 200u : 600u, quick ? 400u : 2000u}, 8}});

#ifdef _OPENMP
  std::printf("OpenMP max threads: %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; parallel path runs serially\n");
#endif
  std::printf("%-18s %12s %12s %9s %s\n", "case", "serial [s]", "parallel [s]",
              "speedup", "bit-identical");

  bool all_identical = true;
  for (auto& c : cases) {
    cplx serial_v, parallel_v;
    const double ts = time_once(c.seqs, c.p, c.plan, Parallel::off, &serial_v);
    const double tp = time_once(c.seqs, c.p, c.plan, Parallel::on, &parallel_v);
    const bool same = std::memcmp(&serial_v, &parallel_v, sizeof(cplx)) == 0;
    all_identical = all_identical && same;
    std::printf("%-18s %12.4f %12.4f %8.2fx %s\n", c.name, ts, tp,
                ts / (tp > 0 ? tp : 1e-12), same ? "yes" : "NO");
  }
  if (!all_identical) {
    std::printf("FAIL: serial and parallel reductions disagree\n");
    return 1;
  }
  return 0;
}
