// Peels a Poisson sample in the unit square and draws the layers as an SVG.
// usage: demo_onion_svg [lambda] [out.svg]

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "peellab/peeling.hpp"
#include "peellab/sampling.hpp"

using namespace peellab;

int main(int argc, char** argv) {
  const double lambda = argc > 1 ? std::atof(argv[1]) : 400.0;
  const std::string out = argc > 2 ? argv[2] : "onion.svg";
  const PointSet ps = sample_poisson(HPolytope::cube(2), lambda, Seed{2024, 0});
  const PeelingResult pr = peel(ps);
  std::cout << ps.size() << " points, " << pr.num_layers() << " layers\n";
  for (int n = 1; n <= std::min(pr.num_layers(), 5); ++n)
    std::cout << "layer " << n << ": " << pr.layer_ids[n - 1].size() << " points, area "
              << pr.layers[n - 1].volume << '\n';

  std::ofstream svg(out);
  const double s = 500;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << s << "\" height=\"" << s << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  auto xy = [&](PointId id) {
    for (std::size_t i = 0; i < ps.size(); ++i)
      if (ps.id(i) == id) return std::pair{ps.coord(i)[0] * s, (1 - ps.coord(i)[1]) * s};
    return std::pair{0.0, 0.0};
  };
  for (int n = 1; n <= pr.num_layers(); ++n) {
    const auto& h = pr.layers[n - 1];
    const int shade = 40 + (200 * n) / (pr.num_layers() + 1);
    for (const auto& e : h.faces.size() > 1 ? h.faces[1] : std::vector<std::vector<PointId>>{}) {
      const auto [x0, y0] = xy(e[0]);
      const auto [x1, y1] = xy(e[1]);
      svg << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y1
          << "\" stroke=\"rgb(" << shade << ",60," << 255 - shade << ")\"/>\n";
    }
  }
  for (std::size_t i = 0; i < ps.size(); ++i)
    svg << "<circle cx=\"" << ps.coord(i)[0] * s << "\" cy=\"" << (1 - ps.coord(i)[1]) * s << "\" r=\"1.5\"/>\n";
  svg << "</svg>\n";
  std::cout << "wrote " << out << '\n';
}
