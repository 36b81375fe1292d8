// Samples the limit process in a window, peels it with grains and prints the
// lowest layers with their maximal heights and face counts.

#include <iostream>

#include "peellab/rescaled_conelike.hpp"
#include "peellab/sampling.hpp"

using namespace peellab;

int main() {
  for (int d = 2; d <= 3; ++d) {
    const LimitWindow win{4.0, -6.0, 1.0};
    const PointSet ys = sample_limit_process(win, d, Seed{7, static_cast<std::uint64_t>(d)});
    const ConePeelingResult cr = cone_peel(ys, ConePeelOptions{4, true});
    std::cout << "d = " << d << ": " << ys.size() << " points in the window\n";
    for (int n = 1; n <= cr.num_layers(); ++n) {
      double hmax = -1e300;
      for (PointId id : cr.layer_ids[n - 1])
        for (std::size_t i = 0; i < ys.size(); ++i)
          if (ys.id(i) == id) hmax = std::max(hmax, ys.coord(i)[d - 1]);
      std::cout << "  layer " << n << ": " << cr.layer_ids[n - 1].size() << " points, max height " << hmax
                << ", face counts";
      for (auto f : cr.face_counts(n)) std::cout << ' ' << f;
      std::cout << '\n';
    }
  }
}
