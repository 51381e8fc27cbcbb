// Two photons, one per input port of a beam splitter, same polarization:
// sweep the reflectivity and print the cross-port coincidence probability.
// At 50/50 the coincidence vanishes (Hong-Ou-Mandel interference).

#include <cstdio>

#include "stimclone/fock.hpp"
#include "stimclone/optics.hpp"

using namespace stimclone;
using fock::Pol;

int main() {
  auto registry = std::make_shared<const fock::ModeRegistry>(
      std::vector<fock::ModeSpec>{{fock::kChannelA, Pol::V},
                                  {fock::kChannelA, Pol::H},
                                  {fock::port_channel(0), Pol::V},
                                  {fock::port_channel(0), Pol::H}},
      4);
  const auto in1 = registry->id(fock::kChannelA, Pol::V);
  const auto in2 = registry->id(fock::port_channel(0), Pol::V);

  fock::FockState pair = create(create(make_vacuum(registry), in1), in2);

  std::printf("# reflectivity  P(coincidence)\n");
  for (int i = 0; i <= 20; ++i) {
    const double r = i / 20.0;
    const auto bs = optics::beam_splitter(*registry, fock::kChannelA, fock::port_channel(0), r);
    const auto out = optics::apply_transform(pair, bs);
    fock::Occupation coincidence(registry->size(), 0);
    coincidence[in1.value] = 1;
    coincidence[in2.value] = 1;
    std::printf("%12.3f  %14.6e\n", r, std::norm(out.amplitude(coincidence)));
  }
  return 0;
}
