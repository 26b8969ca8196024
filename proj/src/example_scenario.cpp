#include "jumpsyn/scenario_io.hpp"

namespace jumpsyn {

// Two-mode benchmark from the numerical example; tau0, horizon, dt, seed and
// the delay/disturbance realizations are toolkit choices since the source
// experiment leaves them open.
const char* example_scenario_text() {
    return R"json({
  "modes": [
    {
      "A": [[0.0, -0.45], [0.9, 0.9]],
      "B": [[0.5], [1.1]],
      "C": [[2.0, 0.0], [0.0, 2.0]],
      "J": [[-0.2, 0.0], [0.0, -0.2]],
      "E": [[0.0, -0.01], [-0.01, -0.03]],
      "Psi": [[0.4, 0.5], [-0.3, 1.2]],
      "Phi": [[0.1, 0.0], [0.0, 0.1]]
    },
    {
      "A": [[0.0, -0.29], [0.9, -1.26]],
      "B": [[0.6], [1.4]],
      "C": [[3.0, 0.0], [0.0, 3.0]],
      "J": [[-0.3, 0.0], [0.0, -0.3]],
      "E": [[-0.01, -0.03], [-0.06, -0.1]],
      "Psi": [[-0.2, -0.4], [0.0, -0.6]],
      "Phi": [[1.0, 0.0], [0.0, 1.0]]
    }
  ],
  "generator": [[-5.0, 5.0], [3.0, -3.0]],
  "observation_rates": [[3.0, 3.0], [3.0, 3.0]],
  "delay": {"tau0": 1.0, "tau_plus": 0.5},
  "performance": {
    "gamma": 1.0,
    "f2": 15.0,
    "f_inf": 17.0,
    "X": 2.0,
    "L": [
      [[1.0, 0.0], [0.0, 1.0]],
      [[1.0, 0.0], [0.0, 1.0]],
      [[1.0, 0.0], [0.0, 1.0]],
      [[1.0, 0.0], [0.0, 1.0]]
    ],
    "phi0": [0.0, 1.0]
  },
  "sim": {
    "r0": 1,
    "robs0": 1,
    "horizon": 30.0,
    "dt": 0.001,
    "seed": 20240817,
    "runs": 200,
    "disturbance": {"kind": "example-waveform"},
    "delay_signal": {"kind": "ramp", "initial": 0.0}
  }
}
)json";
}

} // namespace jumpsyn
