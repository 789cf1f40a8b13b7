#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(pcm) = wcnkit::ahp::Pcm::parse(text) {
            // Accepted matrices must be exactly reciprocal.
            for i in 0..4 {
                for j in 0..4 {
                    assert!((pcm.0[i][j] * pcm.0[j][i] - 1.0).abs() <= 1e-12);
                }
            }
        }
    }
});
