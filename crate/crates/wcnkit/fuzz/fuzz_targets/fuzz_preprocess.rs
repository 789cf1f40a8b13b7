#![no_main]

use libfuzzer_sys::fuzz_target;

use wcnkit::corpus::{preprocess, RawDocument, StopwordPolicy};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let policy = StopwordPolicy::default();
        let doc = RawDocument {
            id: "fuzz".into(),
            text: text.to_string(),
        };
        let first = preprocess(&doc, &policy);
        // Tokenization is idempotent on its own output.
        let again = preprocess(
            &RawDocument {
                id: "fuzz".into(),
                text: first.tokens.join(" "),
            },
            &policy,
        );
        assert_eq!(first.tokens, again.tokens);
    }
});
