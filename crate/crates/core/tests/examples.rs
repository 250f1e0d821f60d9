macro_rules! example_test {
    ($name:ident) => {
        mod $name {
            #![allow(dead_code)]
            include!(concat!(
                env!("CARGO_MANIFEST_DIR"),
                "/examples/",
                stringify!($name),
                ".rs"
            ));

            #[test]
            fn runs() {
                run_example().expect("example should run");
            }
        }
    };
}

example_test!(hash_families);
example_test!(two_level_sampling);
example_test!(planted_game);
example_test!(sequence_of_games);
example_test!(signature_phases);
example_test!(heavy_three_pass);
example_test!(heavy_one_pass);
example_test!(martingale_estimate);
example_test!(lemma_validators);
example_test!(stream_files);
