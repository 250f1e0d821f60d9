// Writing and reading streams in the text and binary formats.

use fkmoments::stream::{gen_zipf, read_stream, write_binary, write_text};

pub fn run_example() -> anyhow::Result<()> {
    let dir = tempfile::tempdir()?;
    let s = gen_zipf(1000, 5000, 1.1, 3)?;
    let text = dir.path().join("zipf.txt");
    let bin = dir.path().join("zipf.bin");
    write_text(&text, &s)?;
    write_binary(&bin, &s)?;
    println!(
        "text {} bytes, binary {} bytes",
        std::fs::metadata(&text)?.len(),
        std::fs::metadata(&bin)?.len()
    );
    assert_eq!(read_stream(&text)?, s);
    assert_eq!(read_stream(&bin)?, s);
    println!("both formats round-trip {} tokens", s.len());
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}
