use wcnet::connectivity;
use wcnet::hopf;
use wcnet::kernels::DelayKernel;
use wcnet::model::ModelParams;
use wcnet::simulate::{self, InitialData, SimConfig, SweepConfig};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let which = args.get(1).map(String::as_str).unwrap_or("point");
    let params = ModelParams::preset(0.0, 0.0);
    match which {
        "point" => {
            // spec example: uni:10, no delay, (1.2, 1.95)
            let conn = connectivity::uni_ring(10).unwrap();
            let p = params.with_weights(1.2, 1.95);
            let initial = InitialData::perturbed_equilibrium_seeded(&p, 10, DelayKernel::NoDelay, 0.01, 1);
            let traj = simulate::integrate(&p, DelayKernel::NoDelay, &conn, &initial, 600.0, 0.01).unwrap();
            let v = simulate::classify_sync(&traj, 500.0, 1e-3).unwrap();
            println!("point (1.2,1.95): a={:.6} sync={} pattern={:?}", v.a, v.synchronized, v.pattern);
        }
        "uni10" => {
            let conn = connectivity::uni_ring(10).unwrap();
            let seed: u64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(2026);
            let cfg = SweepConfig {
                w_ie_range: (0.0, 3.0),
                w_e_range: (1.5, 3.0),
                points: 100,
                seed,
                skip_stable: true,
                radius: 8.0,
                sim: SimConfig::default(),
            };
            let rows = simulate::sweep(&params, DelayKernel::NoDelay, &conn, &cfg);
            let grid = hopf::default_w_ie_grid();
            let sync = hopf::sync_curve(&params, DelayKernel::NoDelay, &grid).unwrap();
            let mut desync = 0;
            let mut sim = 0;
            for r in &rows {
                if let Some(v) = &r.verdict {
                    sim += 1;
                    if !v.synchronized {
                        desync += 1;
                        let sc = sync.interpolate(r.w_ie).map(|x| x.0).unwrap_or(f64::NAN);
                        println!("desync: w_ie={:.3} w_e={:.3} above_sync={:+.3} a={:.4} {:?}", r.w_ie, r.w_e, r.w_e - sc, v.a, v.pattern);
                    }
                }
                if r.error.is_some() { println!("ERR {:?}", r.error); }
            }
            println!("seed {seed}: simulated={sim} desync={desync}");
        }
        "bi8" => {
            let conn = connectivity::bi_ring(8).unwrap();
            let kernel = match args.get(3).map(String::as_str) {
                Some("uniform") => DelayKernel::uniform(0.1, 0.1).unwrap(),
                _ => DelayKernel::NoDelay,
            };
            let seed: u64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(2026);
            let cfg = SweepConfig {
                w_ie_range: (0.0, 6.0),
                w_e_range: (0.0, 4.0),
                points: 100,
                seed,
                skip_stable: true,
                radius: 8.0,
                sim: SimConfig::default(),
            };
            let rows = simulate::sweep(&params, kernel, &conn, &cfg);
            let mut desync = 0; let mut sim = 0; let mut stab = 0;
            for r in &rows {
                if r.stable == Some(true) { stab += 1; }
                if let Some(v) = &r.verdict {
                    sim += 1;
                    if !v.synchronized { desync += 1; println!("desync: {:.3} {:.3} a={:.4} {:?}", r.w_ie, r.w_e, v.a, v.pattern); }
                }
                if r.error.is_some() { println!("ERR {:?}", r.error); }
            }
            println!("bi8 {kernel:?} seed {seed}: stable={stab} simulated={sim} desync={desync}");
        }
        "uni8u" => {
            let conn = connectivity::uni_ring(8).unwrap();
            let kernel = DelayKernel::uniform(0.1, 0.1).unwrap();
            let seed: u64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(2026);
            let cfg = SweepConfig {
                w_ie_range: (0.3, 2.3),
                w_e_range: (1.7, 2.8),
                points: 100,
                seed,
                skip_stable: true,
                radius: 8.0,
                sim: SimConfig::default(),
            };
            let rows = simulate::sweep(&params, kernel, &conn, &cfg);
            let mut desync = 0; let mut sim = 0;
            for r in &rows {
                if let Some(v) = &r.verdict {
                    sim += 1;
                    if !v.synchronized { desync += 1; println!("desync: {:.3} {:.3} a={:.4} {:?}", r.w_ie, r.w_e, v.a, v.pattern); }
                }
                if r.error.is_some() { println!("ERR {:?}", r.error); }
            }
            println!("uni8 uniform seed {seed}: simulated={sim} desync={desync}");
        }
        _ => eprintln!("unknown probe"),
    }
}
