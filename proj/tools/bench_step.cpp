#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "mesofcs/dynamics.hpp"
#include "mesofcs/leads.hpp"

using namespace mesofcs;

int main(int argc, char** argv) {
  const Index modes = argc > 1 ? std::atoi(argv[1]) : 100;
  const int windows = argc > 2 ? std::atoi(argv[2]) : 2;
  const int steps = argc > 3 ? std::atoi(argv[3]) : 20;
  ReservoirSpec l{"L", 0.5, 10.0, 0, FlatBand{0.5, 50.0}, modes};
  ReservoirSpec r{"R", 0.5, -10.0, 1, FlatBand{0.5, 50.0}, modes};
  AssembledModel model =
      assemble(SystemSpec::two_site(0.5, DriveWaveform::cosine(4.0, 1.0)), {discretize(l), discretize(r)});
  Propagator p(model, initial_covariance(model, InitialCovariance::leads_thermal), 0.0, {0.01});
  for (int w = 0; w < windows; ++w) p.open_window(w % 2);
  auto t0 = std::chrono::steady_clock::now();
  for (int s = 0; s < steps; ++s) p.step();
  auto t1 = std::chrono::steady_clock::now();
  std::printf("n=%ld windows=%d: %.3f ms/step  J=%.6g\n", (long)model.dimension(), windows,
              std::chrono::duration<double, std::milli>(t1 - t0).count() / steps, p.current(0).real());
}
