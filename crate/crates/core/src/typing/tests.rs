use alloc::string::ToString;

use super::*;
use crate::funsym::builtin_registry;
use crate::parser::{parse_process, parse_type, parse_unit};

fn ty(s: &str) -> SessionType {
    parse_type(s).unwrap()
}

fn lin(items: &[(&str, &str)]) -> LinearEnv {
    items.iter().map(|(x, a)| (x.to_string(), ty(a))).collect()
}

fn exp(items: &[(&str, &str, &str)]) -> UnrestrictedEnv {
    items.iter().map(|(u, p, a)| (u.to_string(), (p.parse().unwrap(), ty(a)))).collect()
}

fn check(gamma: UnrestrictedEnv, delta: LinearEnv, src: &str, z: &str, c: &str) -> Result<TypingDerivation, TypingError> {
    let reg = builtin_registry();
    let d = check_process(&["n".into()], &gamma, &delta, &TermEnv::new(), &parse_process(src).unwrap(), &z.into(), &ty(c), &reg)?;
    validate_derivation(&d, &reg).unwrap_or_else(|e| panic!("{e}\n{}", d.to_sexpr()));
    Ok(d)
}

fn weight(src: &str, delta: &[(&str, &str)], c: &str) -> Polynomial {
    check(UnrestrictedEnv::new(), lin(delta), src, "o", c).unwrap().weight
}

#[test]
fn forwarding_a_boolean() {
    let d = check(UnrestrictedEnv::new(), lin(&[("x", "Bool")]), "in x (v). out o v", "o", "Bool").unwrap();
    assert_eq!(d.rule, Rule::BoolL);
    assert_eq!(d.weight, Polynomial::constant(2));
}

#[test]
fn cut_types_are_inferred() {
    let d = check(UnrestrictedEnv::new(), LinearEnv::new(), "new x. (out x true | in x (v). out o v)", "o", "Bool").unwrap();
    assert!(d.rules().contains(&Rule::Cut));
    // Either orientation of the composition.
    check(UnrestrictedEnv::new(), LinearEnv::new(), "new x. (in x (v). out o v | out x true)", "o", "Bool").unwrap();
}

#[test]
fn let_charges_the_cost() {
    assert_eq!(weight("let k = gen() in out o k", &[], "Str[n]"), "n + 2".parse().unwrap());
    assert_eq!(weight("let b = flipcoin() in out o b", &[], "Bool"), Polynomial::constant(3));
}

#[test]
fn copies_count_against_the_budget() {
    let src = "send u (new a). in a (v). send u (new b). in b (w). out o v";
    let d = check(exp(&[("u", "2", "Bool")]), LinearEnv::new(), src, "o", "Bool").unwrap();
    assert_eq!(d.rule, Rule::Copy);
    let e = check(exp(&[("u", "1", "Bool")]), LinearEnv::new(), src, "o", "Bool").unwrap_err();
    assert!(matches!(e, TypingError::PolyNotLeq(..)), "{e}");
}

#[test]
fn replicated_servers() {
    let src = "new u. (!in u (y). out y true | send u (new a). in a (v). send u (new b). in b (w). out o w)";
    let d = check(UnrestrictedEnv::new(), LinearEnv::new(), src, "o", "Bool").unwrap();
    assert!(d.rules().contains(&Rule::CutBang));
    let cut = d.premises.iter().chain(core::iter::once(&d)).find(|x| x.rule == Rule::CutBang).unwrap();
    assert_eq!(cut.multiplicity, Some(Polynomial::constant(2)));
}

#[test]
fn banged_linear_channel() {
    let src = "send u (new a). in a (v). out o v";
    let d = check(UnrestrictedEnv::new(), lin(&[("u", "![n + 1] Bool")]), src, "o", "Bool").unwrap();
    assert_eq!(d.rule, Rule::BangL);
}

#[test]
fn linearity_is_enforced() {
    let e = check(UnrestrictedEnv::new(), lin(&[("x", "Bool")]), "out o true", "o", "Bool").unwrap_err();
    assert!(matches!(e, TypingError::LinearityViolation(_)), "{e}");
    let e = check(UnrestrictedEnv::new(), LinearEnv::new(), "in x (v). out o v", "o", "Bool").unwrap_err();
    assert!(matches!(e, TypingError::NoRuleApplies(_) | TypingError::UnboundName(_)), "{e}");
}

#[test]
fn type_errors() {
    let e = check(UnrestrictedEnv::new(), LinearEnv::new(), "out o true", "o", "Str[n]").unwrap_err();
    assert!(matches!(e, TypingError::TypeMismatch { .. }), "{e}");
    let e = check(UnrestrictedEnv::new(), LinearEnv::new(), "out o #0101", "o", "Str[3]").unwrap_err();
    assert!(matches!(e, TypingError::StringTooLong { .. }), "{e}");
    let e = check(UnrestrictedEnv::new(), LinearEnv::new(), "let k = gen[m]() in out o k", "o", "Str[m]").unwrap_err();
    assert!(matches!(e, TypingError::VarsOutsideV(_)), "{e}");
}

#[test]
fn choices() {
    let src = "case x of inl => in x (v). out o v / inr => x.inl. in x (w). out o w";
    let d = check(UnrestrictedEnv::new(), lin(&[("x", "Bool + (Bool & Bool)")]), src, "o", "Bool").unwrap();
    assert_eq!(d.rule, Rule::PlusL);
}

#[test]
fn channel_passing() {
    let src = "recv o (x). in x (v). out o v";
    check(UnrestrictedEnv::new(), LinearEnv::new(), src, "o", "Bool -o Bool").unwrap();
    let src = "send o (new y). (out y true | out o false)";
    check(UnrestrictedEnv::new(), LinearEnv::new(), src, "o", "Bool * Bool").unwrap();
    let src = "send f (new y). (out y true | in f (r). out o r)";
    check(UnrestrictedEnv::new(), lin(&[("f", "Bool -o Bool")]), src, "o", "Bool").unwrap();
}

#[test]
fn units_and_inlining() {
    let src = "
        params n.
        type Key = Str[n].
        proc Gen() :: (out : Key) = let k = gen() in out out k
        proc Use() :: (exp : Bool) = new out. (@Gen | in out (k). let r = eq(k, k) in out exp r)
    ";
    let unit = parse_unit(src).unwrap();
    let reg = builtin_registry();
    for (name, r) in check_unit(&unit, &reg) {
        let d = r.unwrap_or_else(|e| panic!("{name}: {e}"));
        validate_derivation(&d, &reg).unwrap();
    }
}

#[test]
fn substitution_in_derivations() {
    let d = check(UnrestrictedEnv::new(), LinearEnv::new(), "let k = gen() in out o k", "o", "Str[n]").unwrap();
    let d2 = d.substitute_params("n", &"n^2".parse().unwrap());
    assert_eq!(d2.weight, "n^2 + 2".parse().unwrap());
}
