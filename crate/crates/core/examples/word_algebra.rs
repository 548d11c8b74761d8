// Reduced words in F(a, b): products, powers, conjugacy classes.
//
// ```bash
// cargo run --example word_algebra
// ```

use std::error::Error;

use surface_qm::Word;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let g: Word = "abA".parse()?;
    let h: Word = "aBB".parse()?;
    println!("g = {g}, h = {h}");
    println!("g·h = {}", &g * &h);
    println!("g⁻¹ = {}", g.inverse());
    println!("g³ = {}", g.pow(3));

    let (core, conj) = g.cyclic_reduce();
    println!("g = {conj}·{core}·{}", conj.inverse());
    println!("class of g: {}", g.conjugacy_representative());
    println!("abelianization of g·h: {:?}", (&g * &h).abelianization(2));

    let commutator: Word = "abAB".parse()?;
    assert_eq!(commutator.abelianization(2), vec![0, 0]);
    assert!((&commutator * &commutator.inverse()).is_identity());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("word algebra example");
}
