// Copyright 2026 The bayeskit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#ifndef BAYESKIT_ACQ_SPEC_HPP
#define BAYESKIT_ACQ_SPEC_HPP

#include <string>

#include "bayeskit/acq/parallel.hpp"
#include "bayeskit/acqopt.hpp"
#include "bayeskit/core.hpp"

namespace bayeskit {

enum class AcquisitionKind { EI, KG, KGCP, QEI, ES };
enum class QeiMethod { JointMC, ConstantLiar };

inline std::string to_string(AcquisitionKind k) {
  switch (k) {
    case AcquisitionKind::EI: return "EI";
    case AcquisitionKind::KG: return "KG";
    case AcquisitionKind::KGCP: return "KGCP";
    case AcquisitionKind::QEI: return "qEI";
    case AcquisitionKind::ES: return "ES";
  }
  return "EI";
}

inline AcquisitionKind acquisition_kind_from_string(const std::string& s) {
  if (s == "EI") return AcquisitionKind::EI;
  if (s == "KG") return AcquisitionKind::KG;
  if (s == "KGCP") return AcquisitionKind::KGCP;
  if (s == "qEI") return AcquisitionKind::QEI;
  if (s == "ES") return AcquisitionKind::ES;
  throw InvalidArgument("unknown acquisition kind: " + s);
}

inline std::string to_string(QeiMethod m) { return m == QeiMethod::JointMC ? "joint-MC" : "constant-liar"; }

inline QeiMethod qei_method_from_string(const std::string& s) {
  if (s == "joint-MC") return QeiMethod::JointMC;
  if (s == "constant-liar") return QeiMethod::ConstantLiar;
  throw InvalidArgument("unknown qEI method: " + s);
}

inline std::string to_string(LieKind l) {
  switch (l) {
    case LieKind::Min: return "min";
    case LieKind::Mean: return "mean";
    case LieKind::Max: return "max";
  }
  return "mean";
}

inline LieKind lie_kind_from_string(const std::string& s) {
  if (s == "min") return LieKind::Min;
  if (s == "mean") return LieKind::Mean;
  if (s == "max") return LieKind::Max;
  throw InvalidArgument("unknown lie: " + s);
}

struct AcquisitionSpec {
  AcquisitionKind kind = AcquisitionKind::EI;
  AscentConfig ascent;  // R, T, a, J_eval for KG; R and line search for the rest

  int q = 1;
  int qei_samples = 1000;
  QeiMethod qei_method = QeiMethod::ConstantLiar;
  LieKind lie = LieKind::Mean;

  int es_grid_size = 32;  // total grid points; split evenly over coordinates
  int es_quantiles = 10;
  int es_argmax_samples = 500;

  // Plain EI on noisy data substitutes mu**_n for f*_n; refused unless set.
  bool noisy_ei_heuristic = false;

  void validate() const {
    ascent.validate();
    if (q < 1) throw InvalidArgument("acquisition: q must be >= 1");
    if (qei_samples < 2) throw InvalidArgument("acquisition: qEI samples must be >= 2");
    if (es_grid_size < 1 || es_quantiles < 1 || es_argmax_samples < 1) {
      throw InvalidArgument("acquisition: ES counts must be >= 1");
    }
    if (q > 1 && kind != AcquisitionKind::QEI) throw InvalidArgument("acquisition: q > 1 requires qEI");
  }
};

}  // namespace bayeskit

#endif  // BAYESKIT_ACQ_SPEC_HPP
