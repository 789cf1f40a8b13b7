#![no_main]

use libfuzzer_sys::fuzz_target;

use wcnkit::corpus::StopwordPolicy;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let policy = StopwordPolicy::from_words(text.lines(), 0.01);
        // Every surviving entry must behave as a stopword.
        for line in text.lines().take(64) {
            let _ = policy.is_stopword(line);
        }
    }
});
