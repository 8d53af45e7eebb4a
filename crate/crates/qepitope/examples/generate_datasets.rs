//! Regenerate the bundled datasets under `data/`.
//!
//! Both files are deterministic; `datagen` tests assert that the committed
//! copies match a fresh run of this generator.
//!
//! ```sh
//! cargo run --example generate_datasets
//! ```

use std::fs;
use std::path::PathBuf;

fn main() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data");
    fs::create_dir_all(&dir).expect("create data dir");

    let sample = qepitope::datagen::generate_sample_epitopes();
    fs::write(dir.join("sample_epitopes.csv"), sample).expect("write sample");

    let (train, test) = qepitope::datagen::generate_separable_split().expect("generate split");
    fs::write(dir.join("synthetic_separable_train.csv"), train).expect("write train");
    fs::write(dir.join("synthetic_separable_test.csv"), test).expect("write test");

    println!(
        "wrote sample_epitopes.csv and synthetic_separable_{{train,test}}.csv to {}",
        dir.display()
    );
}
