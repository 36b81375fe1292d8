// Cap volumes at the corner of the unit square and the sandwich constants.

#include <iostream>

#include "peellab/floating_sandwich.hpp"

using namespace peellab;

int main() {
  for (double z : {0.05, 0.1, 0.2, 0.3})
    std::cout << "v(" << z << ", " << z / 2 << ") = " << v_cube_corner({z, z / 2}) << '\n';
  for (double lambda : {1e4, 1e6, 1e8}) {
    const FloatingParams p = sandwich_params(lambda, 2);
    std::cout << "lambda " << lambda << ": s = " << p.s << ", T = " << p.T << ", T* = " << p.T_star << '\n';
  }
  const CornerRegime reg(HPolytope::cube(2));
  const double x[] = {0.02, 0.03};
  std::cout << "(0.02, 0.03) against t = 1e-3: "
            << (floating_membership(reg, x, 1e-3) == FloatClass::Above ? "inside" : "outside")
            << " the floating body\n";
}
