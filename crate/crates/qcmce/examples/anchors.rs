//! dev scratch: final design scenario check on the 256 grid
use qcmce::analysis::{design_parameters, RoundingMode};

fn main() {
    for (sec, shape) in [
        (100u32, vec![13usize, 13, 13, 13]),
        (100, vec![8, 11, 15, 18]),
        (160, vec![13, 13, 13, 13]),
        (160, vec![8, 11, 15, 18]),
    ] {
        let d = design_parameters(sec, &shape, RoundingMode::Paper).unwrap();
        println!(
            "{sec}-bit {shape:?}: m={} t={} p={} key={} t_th={}",
            d.m, d.t, d.p, d.key_size_bits, d.t_th
        );
    }
}
