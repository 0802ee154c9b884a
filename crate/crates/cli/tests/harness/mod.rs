//! Shared CLI case table used by the golden-file suite and the
//! acceptance gate.

use std::process::Command;

pub struct Case {
    pub name: &'static str,
    pub workspace: &'static str,
    pub args: &'static [&'static str],
    pub exit: i32,
}

pub const CASES: &[Case] = &[
    Case { name: "star_basic", workspace: "ws01", args: &["star", "x", "y"], exit: 0 },
    Case {
        name: "star_series",
        workspace: "ws17",
        args: &["star", "x*y + i/2*lam", "y^2"],
        exit: 0,
    },
    Case { name: "commutator", workspace: "ws01", args: &["commutator", "x", "y"], exit: 0 },
    Case { name: "commutator_m4", workspace: "ws04", args: &["commutator", "x3", "x4"], exit: 0 },
    Case { name: "assoc_moyal_m3", workspace: "ws03", args: &["assoc-check"], exit: 0 },
    Case { name: "assoc_standard_ordered", workspace: "ws09", args: &["assoc-check"], exit: 0 },
    Case { name: "assoc_broken", workspace: "ws10", args: &["assoc-check"], exit: 1 },
    Case { name: "hermitian_moyal", workspace: "ws13", args: &["hermitian-check"], exit: 0 },
    Case { name: "hermitian_broken", workspace: "ws11", args: &["hermitian-check"], exit: 1 },
    Case { name: "poisson_basic", workspace: "ws01", args: &["poisson", "x", "y^2"], exit: 0 },
    Case { name: "poisson_m3", workspace: "ws03", args: &["poisson", "y", "z"], exit: 0 },
    Case { name: "schouten_constant", workspace: "ws04", args: &["schouten"], exit: 0 },
    Case { name: "schouten_linear", workspace: "ws07", args: &["schouten"], exit: 0 },
    Case { name: "schouten_quadratic", workspace: "ws08", args: &["schouten"], exit: 1 },
    Case {
        name: "deform_projector",
        workspace: "ws13",
        args: &["deform-projector", "[1 - x*y, y; x - x^2*y, x*y]"],
        exit: 0,
    },
    Case { name: "metric_free", workspace: "ws01", args: &["metric", "[1]", "[x]", "[y]"], exit: 0 },
    Case {
        name: "metric_projector",
        workspace: "ws02",
        args: &["metric", "[9/25, 12/25; 12/25, 16/25]", "[x; y]", "[y; 1]"],
        exit: 0,
    },
    Case { name: "module_product_bundle", workspace: "ws01", args: &["module-check"], exit: 0 },
    Case { name: "module_two_fibers", workspace: "ws12", args: &["module-check"], exit: 0 },
    Case { name: "module_undeformed", workspace: "ws18", args: &["module-check"], exit: 0 },
    Case {
        name: "module_from_stage_file",
        workspace: "ws19",
        args: &["module-check", "--stages", "tests/fixtures/stages19.json"],
        exit: 0,
    },
    Case {
        name: "extend_module",
        workspace: "ws19",
        args: &["--equivariant", "extend-module"],
        exit: 0,
    },
    Case {
        name: "extend_inconclusive",
        workspace: "ws01",
        args: &["--bounds", "3,2,0", "--equivariant", "extend-module", "--target-order", "2"],
        exit: 2,
    },
    Case {
        name: "equiv_solve",
        workspace: "ws19",
        args: &["equiv-solve", "--stages-a", "tests/fixtures/stages19.json"],
        exit: 0,
    },
    Case {
        name: "lift_mult_x",
        workspace: "ws01",
        args: &["lift-vertical", "tests/fixtures/op_mult_x.json"],
        exit: 0,
    },
    Case {
        name: "lift_fiber_field",
        workspace: "ws19",
        args: &["lift-vertical", "tests/fixtures/op_t_dt.json"],
        exit: 0,
    },
    Case {
        name: "star_prime_mult",
        workspace: "ws01",
        args: &[
            "star-prime",
            "tests/fixtures/op_mult_x.json",
            "tests/fixtures/op_t_dt.json",
        ],
        exit: 0,
    },
    Case { name: "err_syntax", workspace: "ws01", args: &["star", "x +* y", "y"], exit: 3 },
    Case { name: "err_unknown_identifier", workspace: "ws01", args: &["star", "q", "y"], exit: 3 },
    Case { name: "err_not_antisymmetric", workspace: "ws14", args: &["star", "x", "y"], exit: 3 },
    Case { name: "err_reserved_name", workspace: "ws15", args: &["star", "x", "y"], exit: 3 },
    Case { name: "err_nonconstant_tensor", workspace: "ws16", args: &["star", "x", "y"], exit: 3 },
    Case {
        name: "err_not_vertical",
        workspace: "ws01",
        args: &["lift-vertical", r#"{"terms":[{"coeff":"1","derivs":{"x":1}}]}"#],
        exit: 3,
    },
];

pub fn run_case(case: &Case) -> (String, i32) {
    let workspace = format!("tests/fixtures/{}.json", case.workspace);
    let out = Command::new(env!("CARGO_BIN_EXE_fdq"))
        .arg("--workspace")
        .arg(&workspace)
        .args(case.args)
        .output()
        .expect("binary runs");
    let stdout = String::from_utf8(out.stdout).expect("reports are UTF-8");
    (stdout, out.status.code().unwrap_or(-1))
}


