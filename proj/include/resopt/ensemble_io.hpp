#pragma once

#include <cstdint>
#include <string>

#include "resopt/hydroseries.hpp"

namespace resopt {

/// Provenance recorded next to a persisted ensemble.
struct EnsembleMeta {
  std::uint64_t seed = 0;
  std::uint64_t model_hash = 0;
};

/// Packed binary container (16-byte magic "RESOPT-ENSEMBLE1", little-endian
/// fixed-width header, float64 payload, realization-major).
void save_ensemble_binary(const std::string& path, const InflowEnsemble& e,
                          const EnsembleMeta& meta);
InflowEnsemble load_ensemble_binary(const std::string& path,
                                    EnsembleMeta* meta = nullptr);

/// One CSV per realization plus ensemble_manifest.json in `dir`.
void save_ensemble_csv(const std::string& dir, const InflowEnsemble& e,
                       const EnsembleMeta& meta);
InflowEnsemble load_ensemble_csv(const std::string& dir,
                                 EnsembleMeta* meta = nullptr);

/// Dispatch on path type: directory -> CSV layout, file -> binary container.
InflowEnsemble load_ensemble(const std::string& path, EnsembleMeta* meta = nullptr);

}  // namespace resopt
