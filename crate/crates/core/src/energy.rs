//! CPU and radio energy of compressing and relaying one data vector on an
//! MSP430-class node with a 9,600 bps long-range radio.

use crate::metrics::RAW_BITS_PER_VALUE;

/// Clock cycles per operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CpuCostTable {
    pub add: u64,
    pub sub: u64,
    pub mul: u64,
    pub div: u64,
    pub cmp: u64,
    pub exp: u64,
}

impl Default for CpuCostTable {
    fn default() -> Self {
        Self {
            add: 184,
            sub: 177,
            mul: 395,
            div: 405,
            cmp: 37,
            exp: 52_000,
        }
    }
}

impl CpuCostTable {
    pub fn zero() -> Self {
        Self {
            add: 0,
            sub: 0,
            mul: 0,
            div: 0,
            cmp: 0,
            exp: 0,
        }
    }

    /// One logistic sigmoid: `1 / (1 + exp(-v))`.
    pub fn sigmoid(&self) -> u64 {
        self.add + self.div + self.exp
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioModel {
    /// Supply voltage, V.
    pub v_cc: f64,
    /// Transmit current, A.
    pub i_tx: f64,
    /// Receive current, A.
    pub i_rx: f64,
    /// Effective data rate, bit/s.
    pub data_rate: f64,
    /// Microcontroller current, A.
    pub i_mcu: f64,
    /// CPU clock, Hz.
    pub f_clk: f64,
}

impl Default for RadioModel {
    fn default() -> Self {
        Self {
            v_cc: 3.3,
            i_tx: 0.600,
            i_rx: 0.080,
            data_rate: 9600.0,
            i_mcu: 0.00185,
            f_clk: 3.3e6,
        }
    }
}

/// Joules per CPU cycle.
pub fn e_clk(model: &RadioModel) -> f64 {
    model.v_cc * model.i_mcu / model.f_clk
}

/// Joules to send and receive one bit over one hop.
pub fn s_bit(model: &RadioModel) -> f64 {
    model.v_cc * (model.i_tx + model.i_rx) / model.data_rate
}

/// Encoder cycles for one vector: normalization, the `K x L` affine map and
/// `K` sigmoids.
pub fn cycles_compress(l: u64, k: u64, table: &CpuCostTable) -> u64 {
    (table.add + table.div + table.sub + 2 * table.cmp) * l + (table.mul * l + 2 * table.add * l) * k + table.sigmoid() * k
}

/// Extra cycles of the residual stage: decoding the prediction, undoing the
/// normalization, then one subtraction and one comparison per entry.
pub fn residual_stage_cycles(l: u64, k: u64, table: &CpuCostTable) -> u64 {
    (table.mul + table.add) * l * k
        + table.sigmoid() * l
        + (table.sub + table.mul + table.add) * l
        + (table.sub + table.cmp) * l
}

/// CPU energy at the source plus radio energy for `32 K` bits over `hops`.
pub fn energy_compressed(l: u64, k: u64, hops: u64, model: &RadioModel, table: &CpuCostTable) -> f64 {
    e_clk(model) * cycles_compress(l, k, table) as f64 + (RAW_BITS_PER_VALUE * k * hops) as f64 * s_bit(model)
}

pub fn energy_raw(l: u64, hops: u64, model: &RadioModel) -> f64 {
    (RAW_BITS_PER_VALUE * l * hops) as f64 * s_bit(model)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SavingsRow {
    pub hops: u64,
    pub e_raw: f64,
    pub e_compressed: f64,
    /// `e_raw / e_compressed`.
    pub ratio: f64,
}

impl SavingsRow {
    /// Compression pays off only when it costs less than sending raw data.
    pub fn worthwhile(&self) -> bool {
        self.e_compressed < self.e_raw
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyOptions {
    pub model: RadioModel,
    pub table: CpuCostTable,
    /// Also charge [`residual_stage_cycles`] at the source.
    pub residual_stage: bool,
}

pub fn savings_report(l: u64, k: u64, hops: &[u64], opts: &EnergyOptions) -> Vec<SavingsRow> {
    let extra = if opts.residual_stage {
        e_clk(&opts.model) * residual_stage_cycles(l, k, &opts.table) as f64
    } else {
        0.0
    };
    hops.iter()
        .map(|&h| {
            let e_raw = energy_raw(l, h, &opts.model);
            let e_compressed = energy_compressed(l, k, h, &opts.model, &opts.table) + extra;
            SavingsRow {
                hops: h,
                e_raw,
                e_compressed,
                ratio: e_raw / e_compressed,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn clock_energy() {
        let m = RadioModel::default();
        assert_eq!(e_clk(&m), 1.85e-9);
        let fast = RadioModel { f_clk: 6.6e6, ..m };
        assert!(rel(e_clk(&fast), e_clk(&m) / 2.0) < 1e-15);
        assert_eq!(e_clk(&RadioModel { i_mcu: 0.0, ..m }), 0.0);
    }

    #[test]
    fn bit_energy() {
        let m = RadioModel::default();
        assert!(rel(s_bit(&m), 233.75e-6) < 1e-4);
        assert!(rel(s_bit(&RadioModel { i_rx: 0.0, ..m }), 206.25e-6) < 1e-12);
        let fast = RadioModel { data_rate: 19200.0, ..m };
        assert!(rel(s_bit(&fast), s_bit(&m) / 2.0) < 1e-15);
    }

    #[test]
    fn bit_in_cycles() {
        let m = RadioModel::default();
        assert_eq!((s_bit(&m) / e_clk(&m)).round(), 126_351.0);
    }

    #[test]
    fn encoder_cycles() {
        let t = CpuCostTable::default();
        assert_eq!(cycles_compress(1, 0, &t), 840);
        assert_eq!(cycles_compress(0, 0, &t), 0);
        assert_eq!(cycles_compress(90, 32, &t), 3_955_888);
        assert_eq!(cycles_compress(90, 32, &t), 840 * 90 + 763 * 90 * 32 + 52_589 * 32);
    }

    #[test]
    fn cycles_are_bilinear() {
        let t = CpuCostTable::default();
        let c = |l, k| cycles_compress(l, k, &t) as i64;
        for (l, k) in [(3, 4), (90, 32), (720, 20)] {
            assert_eq!(c(l + 1, k) - c(l, k), 840 + 763 * k as i64);
            assert_eq!(c(l, k + 1) - c(l, k), 763 * l as i64 + 52_589);
            assert_eq!(c(l + 1, k + 1) - c(l + 1, k) - c(l, k + 1) + c(l, k), 763);
        }
    }

    #[test]
    fn compressed_energy_example() {
        let (m, t) = (RadioModel::default(), CpuCostTable::default());
        let e = energy_compressed(90, 32, 5, &m, &t);
        assert!(rel(e, 1.85e-9 * 3_955_888.0 + 1024.0 * 233.75e-6 * 5.0) < 1e-12);
        assert!((e - 1.204).abs() < 1e-3);
        let d = energy_compressed(90, 32, 2, &m, &t) - energy_compressed(90, 32, 1, &m, &t);
        assert!(rel(d, 1024.0 * s_bit(&m)) < 1e-12);
        assert_eq!(
            energy_compressed(90, 90, 3, &m, &CpuCostTable::zero()),
            energy_raw(90, 3, &m)
        );
    }

    #[test]
    fn raw_energy_example() {
        let m = RadioModel::default();
        assert!(rel(energy_raw(90, 1, &m), 2880.0 * 233.75e-6) < 1e-12);
        assert!((energy_raw(90, 1, &m) - 0.6732).abs() < 1e-9);
        assert!(rel(energy_raw(90, 4, &m), 4.0 * energy_raw(90, 1, &m)) < 1e-15);
        assert_eq!(energy_raw(0, 3, &m), 0.0);
    }

    #[test]
    fn five_hop_savings() {
        let r = savings_report(90, 32, &[5], &EnergyOptions::default())[0];
        assert!((r.ratio - 2.8).abs() < 0.06, "{}", r.ratio);
        assert!(r.worthwhile());
    }

    #[test]
    fn not_worthwhile_when_cpu_dominates() {
        let r = savings_report(90, 89, &[1], &EnergyOptions::default())[0];
        assert!(!r.worthwhile());
        assert!(r.ratio < 1.0);
    }

    #[test]
    fn ratio_grows_with_hops() {
        let rows = savings_report(90, 32, &(1..=20).collect::<Vec<_>>(), &EnergyOptions::default());
        assert!(rows.windows(2).all(|w| w[1].ratio >= w[0].ratio));
    }

    #[test]
    fn residual_stage_adds_cost() {
        let base = EnergyOptions::default();
        let with = EnergyOptions {
            residual_stage: true,
            ..base
        };
        let a = savings_report(90, 32, &[1], &base)[0];
        let b = savings_report(90, 32, &[1], &with)[0];
        let extra = e_clk(&base.model) * residual_stage_cycles(90, 32, &base.table) as f64;
        assert!(rel(b.e_compressed - a.e_compressed, extra) < 1e-9);
    }

    #[test]
    fn fixed_rate_ratio_with_free_cpu() {
        // Radio-only cost: compressed/raw is exactly K/L at every size.
        let (m, t) = (RadioModel::default(), CpuCostTable::zero());
        for l in [1_000u64, 1_000_000] {
            let k = l / 4;
            let r = energy_compressed(l, k, 3, &m, &t) / energy_raw(l, 3, &m);
            assert!((r - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn fixed_rate_ratio_with_default_cpu() {
        // With a fixed fraction K = cL the encoder's L*K term grows as L^2
        // while the radio term grows as L, so the ratio moves away from c.
        let (m, t) = (RadioModel::default(), CpuCostTable::default());
        let c = 0.25;
        let ratio = |l: u64| energy_compressed(l, l / 4, 3, &m, &t) / energy_raw(l, 3, &m);
        assert!(ratio(1_000) > c);
        assert!(ratio(1_000_000) > ratio(1_000));
    }

    proptest! {
        #[test]
        fn hops_are_linear(l in 1u64..2000, k in 0u64..200, h in 1u64..30) {
            let (m, t) = (RadioModel::default(), CpuCostTable::default());
            let step = energy_compressed(l, k, h + 1, &m, &t) - energy_compressed(l, k, h, &m, &t);
            if k == 0 {
                prop_assert!(step.abs() < 1e-12);
            } else {
                prop_assert!(rel(step, (32 * k) as f64 * s_bit(&m)) < 1e-6);
            }
            prop_assert!(rel(energy_raw(l, h, &m), h as f64 * energy_raw(l, 1, &m)) < 1e-12);
        }
    }
}
