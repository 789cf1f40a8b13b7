#![no_main]

use libfuzzer_sys::fuzz_target;

use wcnkit::corpus::StopwordPolicy;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let policy = StopwordPolicy::default();
        for (idx, line) in text.lines().enumerate() {
            let _ = wcnkit::eval::parse_topic_record(line, idx + 1, &policy);
        }
    }
});
