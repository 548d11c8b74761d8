// Brooks counting quasimorphisms, their homogenization and defect.
//
// ```bash
// cargo run --example counting_quasimorphism
// ```

use std::error::Error;

use surface_qm::{CountingQM, Word};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let q = CountingQM::new("ab".parse()?)?;
    let (a, b): (Word, Word) = ("a".parse()?, "b".parse()?);
    for g in ["a", "b", "ab", "abab", "bAB", "aabb"] {
        let g: Word = g.parse()?;
        println!("h({g}) = {:>3}   r̄({g}) = {:+.3}", q.value(&g), q.homogenized(&g));
    }
    println!("r̄(a) + r̄(b) − r̄(ab) = {}", q.deficiency(&a, &b));

    // homogenization by powers converges to the exact cyclic count
    let g: Word = "abAb".parse()?;
    for k in [1, 10, 100, 1000] {
        println!("h(g^{k})/{k} = {:.4}", q.homogenize_oracle(&g, k));
    }
    println!("exact r̄(g) = {}", q.homogenized(&g));

    println!("defect estimate over words of length ≤ 5: {}", q.estimate_defect(5)?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("counting quasimorphism example");
}
