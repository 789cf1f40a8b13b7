#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        for (idx, line) in text.lines().enumerate() {
            // The parser must only ever return Ok or Err.
            let _ = wcnkit::corpus::parse_jsonl_record(line, idx + 1);
        }
    }
});
