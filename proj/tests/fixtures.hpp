#pragma once

#include "helmddm/decomp.hpp"
#include "helmddm/fem.hpp"

namespace fixture {

using namespace helmddm;

struct Problem {
  Mesh mesh;
  DofMap dofs;
  ProblemParams params;
  AssembledSystem sys;
  Decomposition decomp;
};

inline Problem make_problem(int n, int p, int M, double kappa, double eps,
                            OverlapMode overlap = OverlapMode::minimal) {
  auto [mesh, dofs] = build_mesh(MeshParams{n, p});
  const ProblemParams params{kappa, eps};
  AssembledSystem sys = assemble_global(params, mesh, dofs);
  Decomposition d = decompose(params, mesh, dofs, DecompParams{M, overlap});
  return {std::move(mesh), std::move(dofs), params, std::move(sys), std::move(d)};
}

}  // namespace fixture
