//! Runs every method on a synthetic dataset and prints the comparison.
//!
//! `cargo run --release -p drfs --example desk_run -- <dataset> <n_total> <dim> <k[,k...]> <lambda> <seed>...`

use std::time::Instant;

use drfs::data::{SyntheticDataset, SyntheticSpec};
use drfs::evaluation::{evaluate_method, DownstreamConfig};
use drfs::optimizer::select_features;
use drfs::pipeline::{run_seed, Method, PipelineSettings};

fn main() -> drfs::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let num = |i: usize, d: &str| args.get(i).cloned().unwrap_or_else(|| d.to_string());
    let dataset = SyntheticDataset::from_id(num(0, "1").parse().unwrap())?;
    let n_total: usize = num(1, "3600").parse().unwrap();
    let dim: usize = num(2, "15").parse().unwrap();
    let ks: Vec<usize> = num(3, "10").split(',').map(|v| v.parse().unwrap()).collect();
    let lambda: f64 = num(4, "10").parse().unwrap();
    let seeds: Vec<u64> = if args.len() > 5 {
        args[5..].iter().map(|s| s.parse().unwrap()).collect()
    } else {
        vec![0]
    };

    let data = SyntheticSpec::new(dataset, n_total, dim, 0).generate()?;
    let mut settings = PipelineSettings::default();
    settings.objective.lambda = lambda;
    if dataset == SyntheticDataset::Nonlinear {
        settings.objective.mc_samples = 50;
        settings.optimizer.epochs = 150;
        settings.optimizer.init_center = 2.0;
    }
    let methods_all = [Method::Drfs, Method::Lasso, Method::DroLasso, Method::Random { subsets: 10 }];
    let methods: Vec<Method> = if std::env::var("SKIP_DRFS").is_ok() { methods_all[1..].to_vec() } else { methods_all.to_vec() };
    let ds = DownstreamConfig::default();
    for seed in seeds {
        let t = Instant::now();
        let run = run_seed(&data, seed, &settings, &methods)?;
        println!("seed {seed}: fitted in {:.1}s", t.elapsed().as_secs_f64());
        if let Some(alpha) = run.alpha.as_ref() {
        println!("  alpha: {:?}", alpha.iter().map(|a| (a * 1000.0).round() / 1000.0).collect::<Vec<_>>());
        println!("  order: {:?}", select_features(alpha, alpha.len())?);
        }
        if let Ok(list) = std::env::var("ORACLE") {
            let sel: Vec<usize> = list.split(',').map(|v| v.parse().unwrap()).collect();
            let m = drfs::evaluation::downstream_evaluate(&run.splits.standardized, &sel, &ds)?;
            println!("  oracle {:?} worst={:.4} {:?}", sel, m.worst_mse(), m.populations.iter().map(|p| p.mse).collect::<Vec<_>>());
        }
        for &k in &ks {
        println!("  k = {k}");
        for &m in &methods {
            let o = evaluate_method(&run, m, k, &ds)?;
            let per: Vec<String> = o.metrics[0]
                .populations
                .iter()
                .map(|p| format!("{}={:.4}", p.population, o.mean_mse(&p.population).unwrap()))
                .collect();
            println!("  {:<10} worst={:.4} {} sel={:?}", m.name(), o.worst_mse(), per.join(" "), o.selections[0]);
        }
        }
    }
    Ok(())
}
