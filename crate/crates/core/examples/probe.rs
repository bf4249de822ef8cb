use pmod_core::energy::{capacity_with, SolveOptions};
use pmod_core::modulus::modulus_connect_seeded;
use pmod_core::scenarios::{build_scenario, ScenarioSpec};

fn main() {
    let p = 1.5;
    let s = build_scenario(&ScenarioSpec::WeightedPlaneSector { h: 0.5, depth: 7 }).unwrap();
    let ex = &s.exhaustion;
    for level in [3u32, 5] {
        let g = ex.graph(level).unwrap();
        let f1 = s.chains[0].set_at(ex, 1, level).unwrap();
        let g1 = s.chains[1].set_at(ex, 1, level).unwrap();
        let t0 = std::time::Instant::now();
        let cap = capacity_with(&g, &f1, &g1, p, 1e-7, &SolveOptions::default()).unwrap();
        eprintln!("level {level}: cap(F1,G1) = {:.6} in {:?}", cap.value, t0.elapsed());
        if level == 3 {
            let t0 = std::time::Instant::now();
            match modulus_connect_seeded(&g, &f1, &g1, p, 1e-3, Some(&cap)) {
                Ok(m) => eprintln!("  spot mod = {:.6} rounds {} in {:?}", m.value, m.rounds, t0.elapsed()),
                Err(e) => eprintln!("  spot mod ERR {e} in {:?}", t0.elapsed()),
            }
        }
    }
}
