#include <cstdlib>
#include <string_view>

#include "regcalc/simd.hpp"

namespace regcalc::simd {

#if !defined(REGCALC_HAVE_AVX2)
const KernelTable* avx2_kernels() { return nullptr; }
#endif
#if !defined(REGCALC_HAVE_NEON)
const KernelTable* neon_kernels() { return nullptr; }
#endif

namespace {

const KernelTable* detect() {
  if (const char* env = std::getenv("REGCALC_ISA")) {
    if (std::string_view(env) == "scalar") return &scalar_kernels();
  }
  if (const KernelTable* t = avx2_kernels()) return t;
  if (const KernelTable* t = neon_kernels()) return t;
  return &scalar_kernels();
}

const KernelTable*& current() {
  static const KernelTable* table = detect();
  return table;
}

}  // namespace

const KernelTable& active() { return *current(); }

bool select(Isa isa) {
  const KernelTable* t = nullptr;
  switch (isa) {
    case Isa::scalar: t = &scalar_kernels(); break;
    case Isa::avx2: t = avx2_kernels(); break;
    case Isa::neon: t = neon_kernels(); break;
  }
  if (t == nullptr) return false;
  current() = t;
  return true;
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

std::optional<Isa> parse_isa(std::string_view name) {
  for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon})
    if (name == isa_name(isa)) return isa;
  return std::nullopt;
}

}  // namespace regcalc::simd
