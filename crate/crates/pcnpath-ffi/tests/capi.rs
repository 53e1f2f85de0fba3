//! Drive the exported C ABI exactly as a foreign caller would: through raw
//! pointers and NUL-terminated strings.

use std::ffi::{c_char, CString};
use std::path::PathBuf;
use std::ptr;

use pcnpath_ffi::*;

fn fixture(name: &str) -> CString {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../pcnpath/fixtures")
        .join(name);
    CString::new(path.to_str().unwrap()).unwrap()
}

fn load(name: &str) -> *mut PcnGraph {
    let mut graph: *mut PcnGraph = ptr::null_mut();
    let status = unsafe { pcn_graph_load_file(fixture(name).as_ptr(), &mut graph) };
    assert!(status == PcnStatus::Ok);
    assert!(!graph.is_null());
    graph
}

fn last_error() -> String {
    let needed = unsafe { pcn_last_error_message(ptr::null_mut(), 0) };
    let mut buf = vec![0i8 as c_char; needed];
    unsafe { pcn_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf
        .iter()
        .take_while(|&&c| c != 0)
        .map(|&c| c as u8)
        .collect();
    String::from_utf8(bytes).unwrap()
}

#[test]
fn load_inspect_plan_and_free() {
    let graph = load("double_route.json");
    unsafe {
        assert_eq!(pcn_graph_vertex_count(graph), 4);
        assert_eq!(pcn_graph_arc_count(graph), 4);
        assert_eq!(pcn_graph_vertex_index(graph, c"s".as_ptr()), 0);
        assert_eq!(pcn_graph_vertex_index(graph, c"nobody".as_ptr()), -1);

        let mut route: *mut PcnRoute = ptr::null_mut();
        let status = pcn_plan(
            graph,
            c"s".as_ptr(),
            c"t".as_ptr(),
            10.0,
            PcnPlanner::Unidirectional,
            &mut route,
        );
        assert!(status == PcnStatus::Ok);
        assert!((pcn_route_total_fee(route) - 7.6).abs() < 1e-9);
        assert_eq!(pcn_route_hop_count(route), 2);
        assert!(!pcn_route_source_fees_zero(route));
        assert!(pcn_route_relaxations(route) > 0);
        assert!(pcn_route_pops(route) > 0);

        let needed = pcn_route_hop_amounts(route, ptr::null_mut(), 0);
        assert_eq!(needed, 3);
        let mut amounts = vec![0.0f64; needed];
        pcn_route_hop_amounts(route, amounts.as_mut_ptr(), amounts.len());
        assert!((amounts[0] - 17.6).abs() < 1e-9);
        assert_eq!(amounts[2], 10.0);

        let mut arcs = vec![0u32; pcn_route_arc_ids(route, ptr::null_mut(), 0)];
        pcn_route_arc_ids(route, arcs.as_mut_ptr(), arcs.len());
        assert_eq!(arcs, vec![0, 2]); // s->i then i->t

        pcn_route_free(route);
        pcn_graph_free(graph);
    }
}

#[test]
fn bidirectional_semantics_flag() {
    let graph = load("double_route.json");
    unsafe {
        let mut route: *mut PcnRoute = ptr::null_mut();
        let status = pcn_plan(
            graph,
            c"s".as_ptr(),
            c"t".as_ptr(),
            10.0,
            PcnPlanner::PartialBidirectional,
            &mut route,
        );
        assert!(status == PcnStatus::Ok);
        assert!(pcn_route_source_fees_zero(route));
        assert!((pcn_route_total_fee(route) - 3.0).abs() < 1e-9);
        pcn_route_free(route);
        pcn_graph_free(graph);
    }
}

#[test]
fn no_path_and_error_codes() {
    let graph = load("double_route.json");
    unsafe {
        let mut route: *mut PcnRoute = ptr::null_mut();
        let status = pcn_plan(
            graph,
            c"t".as_ptr(),
            c"s".as_ptr(),
            10.0,
            PcnPlanner::Unidirectional,
            &mut route,
        );
        assert!(status == PcnStatus::NoPath);
        assert!(route.is_null());

        let status = pcn_plan(
            graph,
            c"ghost".as_ptr(),
            c"t".as_ptr(),
            1.0,
            PcnPlanner::Unidirectional,
            &mut route,
        );
        assert!(status == PcnStatus::UnknownVertex);
        assert!(last_error().contains("ghost"));

        let status = pcn_plan(
            graph,
            c"s".as_ptr(),
            c"t".as_ptr(),
            -4.0,
            PcnPlanner::Oracle,
            &mut route,
        );
        assert!(status == PcnStatus::InvalidQuery);

        pcn_graph_free(graph);
    }
}

#[test]
fn loader_error_paths() {
    unsafe {
        let mut graph: *mut PcnGraph = ptr::null_mut();
        let status = pcn_graph_load_file(c"/no/such/file.json".as_ptr(), &mut graph);
        assert!(status == PcnStatus::Io);
        assert!(graph.is_null());

        let status = pcn_graph_load_json(c"{ not json".as_ptr(), &mut graph);
        assert!(status == PcnStatus::Parse);
        assert!(graph.is_null());
        assert!(!last_error().is_empty());

        let status = pcn_graph_load_file(ptr::null(), &mut graph);
        assert!(status == PcnStatus::NullPointer);

        // counts on a null handle are defined
        assert_eq!(pcn_graph_vertex_count(ptr::null()), 0);
        pcn_graph_free(ptr::null_mut());
        pcn_route_free(ptr::null_mut());
    }
}

#[test]
fn header_is_generated_with_the_exported_api() {
    let header = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/pcnpath.h");
    let text = std::fs::read_to_string(header).expect("header exists after build");
    for symbol in [
        "pcn_graph_load_file",
        "pcn_graph_load_json",
        "pcn_graph_free",
        "pcn_plan",
        "pcn_route_total_fee",
        "pcn_route_hop_amounts",
        "pcn_last_error_message",
        "PCN_STATUS_NO_PATH",
        "PCN_PLANNER_PARTIAL_BIDIRECTIONAL",
    ] {
        assert!(text.contains(symbol), "{symbol} missing from header");
    }
}
