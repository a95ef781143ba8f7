#pragma once

#include "aphi/dynamics.hpp"
#include "aphi/observer.hpp"
#include "aphi/types.hpp"

namespace aphi {

/// x = [q; q_dot; zeta; chi; q_d; q_d_dot], the state seen by the safety filter.
struct AugmentedState {
  Vec6 q = Vec6::Zero();
  Vec6 q_dot = Vec6::Zero();
  Vec6 zeta = Vec6::Zero();
  Vec6 chi = Vec6::Zero();
  Vec6 q_d = Vec6::Zero();
  Vec6 q_d_dot = Vec6::Zero();

  Vec3 phi() const { return q.tail<3>(); }
  PlantState plant() const { return {q, q_dot}; }
  ObserverState observer() const { return {zeta, chi}; }

  Vec36 to_vector() const {
    Vec36 x;
    x << q, q_dot, zeta, chi, q_d, q_d_dot;
    return x;
  }

  static AugmentedState from_vector(const Vec36& x) {
    return {x.segment<6>(0),  x.segment<6>(6),  x.segment<6>(12),
            x.segment<6>(18), x.segment<6>(24), x.segment<6>(30)};
  }
};

}  // namespace aphi
