//! Scorer rows against the number of constraints for NeuroLogic, grid
//! beam search and constrained beam search.

use logicbeam::decode::DecoderConfig;
use logicbeam::eval::{bench_scaling, linear_fit, write_csv, BenchDecoder};
use logicbeam::scorer::UniformScorer;
use logicbeam::synth::scaling_instance;

fn main() {
    let vocab_size = 20;
    let scorer = UniformScorer::new(vocab_size, vocab_size as u32 - 1);
    let cfg = DecoderConfig {
        k: 4,
        max_len: 64,
        ..Default::default()
    };
    let decoders = [
        BenchDecoder::Neurologic,
        BenchDecoder::Gbs,
        BenchDecoder::Cbs,
    ];
    let cs: Vec<usize> = (1..=6).collect();
    let records = bench_scaling(
        &scorer,
        |c| (vec![], scaling_instance(c, vocab_size).1),
        &decoders,
        &cs,
        &[4],
        &cfg,
    );

    write_csv(&records, std::io::stdout()).unwrap();
    println!();
    for d in decoders {
        let rows: Vec<_> = records.iter().filter(|r| r.decoder == d.name()).collect();
        let xs: Vec<f64> = rows.iter().map(|r| r.c as f64).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.rows_per_step()).collect();
        let (slope, _, r2) = linear_fit(&xs, &ys);
        let spread = ys.iter().cloned().fold(f64::MIN, f64::max)
            / ys.iter().cloned().fold(f64::MAX, f64::min);
        println!(
            "{:<10} rows/step {:7.2} .. {:7.2}  max/min {spread:6.2}  slope {slope:7.2}  r2 {r2:.4}",
            d.name(),
            ys[0],
            ys[ys.len() - 1]
        );
    }
    let cbs: Vec<_> = records.iter().filter(|r| r.decoder == "cbs").collect();
    println!(
        "cbs rows C=4 / C=1: {:.2}",
        cbs[3].rows as f64 / cbs[0].rows as f64
    );
}
