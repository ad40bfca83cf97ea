//! The three proximal building blocks of the splitting on small inputs.

use panfuse::prox::*;

fn main() -> panfuse::Result<()> {
    // isotropic shrinkage: the prox of tau*|y|
    for tau in [0.0, 1.0, 2.0, 5.0, 6.0] {
        println!("shrink((3,4), {tau}) = {:?}", shrink([3.0, 4.0], tau));
    }

    // shrinkage along a direction leaves the orthogonal part alone
    let eta = [0.6, 0.8];
    for tau in [0.5, 2.0, 10.0] {
        println!("shrink_along((3,4), eta=(0.6,0.8), {tau}) = {:?}", shrink_along([3.0, 4.0], eta, tau));
    }
    println!("shrink_along((3,4), eta=(-0.8,0.6), 1) = {:?}", shrink_along([3.0, 4.0], [-0.8, 0.6], 1.0));

    // ball projection through a decimating selector: only the kept pixel of
    // each 2x2 block moves
    let selector = Selector::Spatial {
        width: 4,
        height: 2,
        q: 2,
        offset: (0, 0),
    };
    let spec = BallSpec::new(vec![0.0, 0.0], 1.0, selector)?;
    let z = vec![3.0, 9.0, 4.0, 9.0, 9.0, 9.0, 9.0, 9.0];
    let projected = project_ball(&z, &spec)?;
    println!("before {z:?}, distance {:.3}", spec.distance(&z));
    println!("after  {projected:?}, distance {:.3}", spec.distance(&projected));
    println!("projecting again changes nothing: {}", project_ball(&projected, &spec)? == projected);
    Ok(())
}
