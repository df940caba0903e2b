//! Trajectories replayed against an independent script
//! (`tests/data/gen_golden.py`) driving the same SplitMix64 stream.

use rand::RngCore;
use ssml_core::protocol::{run_to_halt, ProtocolParams};

struct SplitMix64(u64);

impl RngCore for SplitMix64 {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        for chunk in dest.chunks_mut(8) {
            let bytes = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}

#[test]
fn trajectories_match_reference_script() {
    let data = include_str!("data/golden_trajectories.csv");
    let mut rows = 0;
    for line in data.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let seed: u64 = f[0].parse().unwrap();
        let x0: f64 = f[1].parse().unwrap();
        let m_halt: u32 = f[2].parse().unwrap();
        let params = ProtocolParams::new(0.3, 0.5, m_halt)
            .unwrap()
            .with_clip(Some(std::f64::consts::FRAC_PI_2))
            .unwrap();
        let rec = run_to_halt(
            x0,
            &params,
            |x: f64| (x / 2.0).cos().powi(2),
            &mut SplitMix64(seed),
            1_000_000,
        )
        .unwrap();
        assert_eq!(rec.halt_time, f[3].parse::<u64>().unwrap(), "{line}");
        assert_eq!(rec.failures, f[4].parse::<u64>().unwrap(), "{line}");
        assert_eq!(rec.terminal_x, f[5].parse::<f64>().unwrap(), "{line}");
        rows += 1;
    }
    assert_eq!(rows, 48);
}
