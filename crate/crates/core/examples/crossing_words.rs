// Reading words off paths on the one-holed torus.
//
// Crossing `x = n` to the right reads `a`, to the left `A`; crossing
// `y = n` upward reads `b`, downward `B`.
//
// ```bash
// cargo run --example crossing_words
// ```

use std::error::Error;

use surface_qm::{closing_word, crossing_word, HoledTorus, Point, Segment};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let surface = HoledTorus::new(0.02)?;
    let seg = Segment::new(Point::new(0.5, 0.3), Point::new(2.7, 1.6));
    println!("{:?} -> {:?}: {}", seg.from, seg.to, crossing_word(&seg)?);

    // a small square around the lattice point (1, 1) reads a commutator
    let square = [(0.5, 0.5), (1.5, 0.5), (1.5, 1.5), (0.5, 1.5), (0.5, 0.5)];
    let mut word = surface_qm::Word::identity();
    for p in square.windows(2) {
        let s = Segment::new(Point::new(p[0].0, p[0].1), Point::new(p[1].0, p[1].1));
        word.append(&crossing_word(&s)?);
    }
    println!("loop around the hole: {word}");

    // closing a trajectory back to its start avoids the hole
    let (close, path) = closing_word(&surface, Point::new(0.03, 0.005), Point::new(0.005, 0.03))?;
    let shown = if close.is_identity() { "1".to_string() } else { close.to_string() };
    println!("closing word {shown} along {} segment(s)", path.len());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("crossing words example");
}
