//! Scratch probe for benchmark tuning. Not part of the deliverable surface.

use kscan_core::experiments::*;
use kscan_core::geom::Domain;
use kscan_core::scanner::{self, ScanAlgorithm, ScanConfig};
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let mode = args.get(1).map(String::as_str).unwrap_or("bench6");

    if mode == "bench6" {
        // Standard benchmark probe: clustered n=1e4, f=0.03, p=0.8, q=0.5.
        let domain = Domain::new(0.0, 10.0, 0.0, 10.0).unwrap();
        let baseline = synth_baseline(BaselineKind::Clustered, 10_000, 424242, &domain).unwrap();
        let cfg = HarnessConfig::default();
        let trials = 8;

        for algo in [ScanAlgorithm::Grid, ScanAlgorithm::Fast] {
            let mut cfg = cfg.clone();
            cfg.trials = trials;
            cfg.grid_scale = if algo == ScanAlgorithm::Grid { 1.0 } else { 8.0 };
            let t0 = Instant::now();
            let records = power_experiment(&baseline, &domain, &cfg, &[algo], &[1000]).unwrap();
            let med_js = median(records.iter().map(|r| r.jaccard)).unwrap();
            let med_cd = median(records.iter().map(|r| r.center_distance)).unwrap();
            let med_r = median(records.iter().map(|r| Some(r.ground_truth.kernel.bandwidth)))
                .unwrap();
            let errs = records.iter().filter(|r| r.error.is_some()).count();
            println!(
                "{}: med_js={med_js:.3} med_cd={med_cd:.4} med_r={med_r:.3} cd/r={:.3} errs={errs} elapsed={:.1}s",
                algo.name(),
                med_cd / med_r,
                t0.elapsed().as_secs_f64()
            );
            for r in &records {
                println!(
                    "  trial {}: js={:.3} cd={:.4} r={:.3} phi={:.5} centers={} pts={} dt={:.2}s",
                    r.trial,
                    r.jaccard.unwrap_or(-1.0),
                    r.center_distance.unwrap_or(-1.0),
                    r.ground_truth.kernel.bandwidth,
                    r.phi_found.unwrap_or(-1.0),
                    r.result.map_or(0, |s| s.centers_evaluated),
                    r.result.map_or(0, |s| s.points_scanned),
                    r.runtime_seconds.unwrap_or(-1.0),
                );
            }
        }
    }

    if mode == "bench7" {
        // Speedup probe: n=1e5 clustered, Lambda = 20.
        let n = 100_000;
        let r = 1.0f64;
        let lambda = 20.0;
        let l = lambda * r;
        let domain = Domain::new(0.0, l, 0.0, l).unwrap();
        let baseline = synth_baseline(BaselineKind::Clustered, n, 7711, &domain).unwrap();
        let kernel = kscan_core::geom::KernelRegion::new(baseline[17], r).unwrap();
        let spec = PlantSpec::new(kernel, 0.8, 0.5, 99).unwrap();
        let data = plant_anomaly(&baseline, &spec).unwrap();

        let scale: f64 = args
            .get(2)
            .and_then(|s| s.parse().ok())
            .unwrap_or(32.0);
        for (algo, gs) in [
            (ScanAlgorithm::Fast, scale),
            (ScanAlgorithm::Adaptive, scale),
            (ScanAlgorithm::Prune, 1.0),
            (ScanAlgorithm::Grid, 1.0),
        ] {
            let mut c = ScanConfig::new(algo, 0.1, r);
            c.grid_scale = gs;
            let t0 = Instant::now();
            let res = scanner::scan(&data, &domain, &c).unwrap();
            println!(
                "{}: {:.2}s centers={} pts={} phi={:.5} center=({:.2},{:.2})",
                algo.name(),
                t0.elapsed().as_secs_f64(),
                res.centers_evaluated,
                res.points_scanned,
                res.phi,
                res.best_center.x,
                res.best_center.y
            );
        }
    }
}
