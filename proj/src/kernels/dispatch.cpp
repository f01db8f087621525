#include <atomic>

#include "composolve/kernels.hpp"

namespace composolve::kernels {
namespace {

constexpr KernelTable kScalarTable{Backend::scalar, "scalar",    scalar::dot,
                                   scalar::axpy,    scalar::axpby, scalar::sub,
                                   scalar::soft_threshold};

#if defined(COMPOSOLVE_HAVE_AVX2_KERNELS)
constexpr KernelTable kAvx2Table{Backend::avx2, "avx2",     avx2::dot,
                                 avx2::axpy,    avx2::axpby, avx2::sub,
                                 avx2::soft_threshold};

bool cpu_has_avx2() {
#if defined(__GNUC__) || defined(__clang__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}
#endif

#if defined(COMPOSOLVE_HAVE_NEON_KERNELS)
constexpr KernelTable kNeonTable{Backend::neon, "neon",     neon::dot,
                                 neon::axpy,    neon::axpby, neon::sub,
                                 neon::soft_threshold};
#endif

const KernelTable* best_table() {
#if defined(COMPOSOLVE_HAVE_AVX2_KERNELS)
  if (cpu_has_avx2()) return &kAvx2Table;
#endif
#if defined(COMPOSOLVE_HAVE_NEON_KERNELS)
  return &kNeonTable;
#endif
  return &kScalarTable;
}

std::atomic<const KernelTable*>& selected() {
  static std::atomic<const KernelTable*> table{best_table()};
  return table;
}

}  // namespace

std::vector<const KernelTable*> available() {
  std::vector<const KernelTable*> tables{&kScalarTable};
#if defined(COMPOSOLVE_HAVE_AVX2_KERNELS)
  if (cpu_has_avx2()) tables.push_back(&kAvx2Table);
#endif
#if defined(COMPOSOLVE_HAVE_NEON_KERNELS)
  tables.push_back(&kNeonTable);
#endif
  return tables;
}

const KernelTable* table_for(Backend backend) {
  for (const KernelTable* table : available()) {
    if (table->backend == backend) return table;
  }
  return nullptr;
}

const KernelTable& active() { return *selected().load(std::memory_order_relaxed); }

bool select(Backend backend) {
  const KernelTable* table = table_for(backend);
  if (table == nullptr) return false;
  selected().store(table, std::memory_order_relaxed);
  return true;
}

void select_best() { selected().store(best_table(), std::memory_order_relaxed); }

}  // namespace composolve::kernels
