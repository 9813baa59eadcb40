// Emits plot-ready phase portraits and time series for the two studied
// parameter sets at mu = 0, 0.5 and 1:
//
//   study 1: alpha=1.9, lambda=0.057, beta=1.3, gamma=0.5, (x0,y0)=(0.9,0.5)
//   study 2: alpha=1.0, lambda=0.057, beta=1.2, gamma=0.5, (x0,y0)=(0.5,0.5)
//
// Output: fig<study>_mu<mu>_{timeseries,orbit}.csv in the working directory.

#include <cstdio>
#include <string>

#include "tbdyn/tbdyn.hpp"

int main() {
    using namespace tbdyn;
    struct Study {
        int id;
        ModelParams base;
        State s0;
    };
    const Study studies[] = {
        {1, {1.9, 0.057, 1.3, 0.5, 0.0}, {0.9, 0.5}},
        {2, {1.0, 0.057, 1.2, 0.5, 0.0}, {0.5, 0.5}},
    };
    const double mus[] = {0.0, 0.5, 1.0};
    const char* mu_tag[] = {"0", "0.5", "1"};

    for (const Study& st : studies) {
        for (int k = 0; k < 3; ++k) {
            ModelParams p = st.base;
            p.mu = mus[k];
            const Trajectory traj = integrate(p, st.s0, 200.0);
            const PhasePortraitData data = phase_portrait_data(traj, 4001);
            const std::string stem =
                "fig" + std::to_string(st.id) + "_mu" + mu_tag[k] + "_";
            io::write_file(stem + "timeseries.csv", io::timeseries_csv(data));
            io::write_file(stem + "orbit.csv", io::orbit_csv(data));
            std::string label = "n/a";
            try {
                label = to_string(classify(traj, p, equilibria(p)).kind);
            } catch (const inconclusive_error&) {
                label = "Inconclusive";
            }
            std::printf("study %d mu=%s: terminal %s, regime %s -> %stimeseries.csv\n",
                        st.id, mu_tag[k], to_string(traj.terminal), label.c_str(),
                        stem.c_str());
        }
    }
    return 0;
}
