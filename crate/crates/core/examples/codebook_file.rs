//! Saving and loading a codebook, and decoding individual codes.

use affectsynth::codebook::LinearDecoder;
use affectsynth::{decode_hard, CodeGrid, Codebook};

fn main() -> affectsynth::Result<()> {
    let toy = Codebook::toy(8, 4, 2, 0.3, 5)?;
    let mut bytes = Vec::new();
    toy.write_to(&mut bytes)?;
    let header = bytes.split(|&b| b == b'\n').next().unwrap_or_default();
    println!("header: {}", String::from_utf8_lossy(header));
    println!("{} bytes total", bytes.len());
    assert_eq!(Codebook::read_from(bytes.as_slice())?, toy);

    // a two-code book with an explicit decoder: code 0 is black, code 1 white
    let patch = 2 * 2 * 3;
    let decoder = LinearDecoder::new(2, 1, vec![1.0; patch], vec![0.0; patch])?;
    let bw = Codebook::new(vec![vec![0.0], vec![1.0]], decoder)?;
    let img = decode_hard(&CodeGrid::from_rows(&[vec![0, 1], vec![1, 0]])?, &bw)?;
    for y in 0..img.height() {
        let row: Vec<String> = (0..img.width()).map(|x| format!("{:.0}", img.pixel(y, x)[0])).collect();
        println!("{}", row.join(" "));
    }
    Ok(())
}
