#ifndef DIRACGAP_MODEL_HPP
#define DIRACGAP_MODEL_HPP

#include <cmath>
#include <utility>

#include "diracgap/errors.hpp"

namespace diracgap {

template <typename Scalar>
struct ModelParamsT {
  Scalar m;
  Scalar omega;
  Scalar p;
  Scalar mu;
  Scalar kappa;
  Scalar nu;
};

using ModelParams = ModelParamsT<double>;

/// (kappa, nu) = (sqrt(m^2 - omega^2), (m - omega)/(m + omega)).
template <typename Scalar>
std::pair<Scalar, Scalar> derived_params(const Scalar& m, const Scalar& omega) {
  using std::sqrt;
  if (!(m > 0) || !(omega > 0) || !(omega < m))
    throw DomainError("derived_params: need m > 0 and 0 < omega < m");
  // (m-w)(m+w) avoids the cancellation in m^2 - w^2 near w = m.
  Scalar kappa = sqrt((m - omega) * (m + omega));
  Scalar nu = (m - omega) / (m + omega);
  return {kappa, nu};
}

template <typename Scalar>
ModelParamsT<Scalar> make_params(const Scalar& m, const Scalar& omega,
                                 const Scalar& p = Scalar(1),
                                 const Scalar& mu = Scalar(0)) {
  if (!(p > 0)) throw DomainError("make_params: need p > 0");
  auto [kappa, nu] = derived_params(m, omega);
  return ModelParamsT<Scalar>{m, omega, p, mu, kappa, nu};
}

inline ModelParams make_params(double m, double omega, double p = 1.0,
                               double mu = 0.0) {
  return make_params<double>(m, omega, p, mu);
}

template <typename Scalar>
ModelParamsT<Scalar> with_p(ModelParamsT<Scalar> params, const Scalar& p) {
  if (!(p > 0)) throw DomainError("with_p: need p > 0");
  params.p = p;
  return params;
}

template <typename Scalar>
ModelParamsT<Scalar> with_mu(ModelParamsT<Scalar> params, const Scalar& mu) {
  params.mu = mu;
  return params;
}

}  // namespace diracgap

#endif
