// scratch probe: is the early-time deficit finite-M skew or scheme bias?
use intermit_core::bounds::{InitialData, ModelSpec, Sigma};
use intermit_core::levy::LevySymbol;
use intermit_core::renewal::{solve_second_moment, VolterraProblem};
use intermit_core::simulator::{run_ensemble, GridSpec, SimOptions};

fn main() {
    let model = ModelSpec::new(
        LevySymbol::brownian(1.0).unwrap(),
        Sigma::linear(1.0).unwrap(),
        InitialData::constant(1.0).unwrap(),
    );
    let prob = VolterraProblem::new(LevySymbol::brownian(1.0).unwrap(), 1.0, 1.0, 10.0, 0.005).unwrap();
    let ren = solve_second_moment(&prob).unwrap();
    for (m, seed) in [(2000usize, 1u64), (16000, 2), (16000, 3)] {
        let grid = GridSpec { length: 64.0, points: 512, dt: 0.01, t_max: 10.0, ensemble: m, seed };
        let opts = SimOptions { record_every: 100, fit_window: Some((5.0, 10.0)), zero_noise: false };
        let out = run_ensemble(&grid, &model, &[2], &opts).unwrap();
        let c = &out.curves[0];
        print!("M={m:6} seed={seed}: ");
        for (i, &t) in c.times.iter().enumerate() {
            if t == 0.0 { continue; }
            let ri = (t / 0.005).round() as usize;
            print!("t{:.0}:{:.3}({:.1}%) ", t, c.moments[i] / ren.moments[ri], 100.0 * c.stderr[i] / c.moments[i]);
        }
        println!();
    }
}
