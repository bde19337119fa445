//! Loaders for `nodes.csv`, `links.csv` and `uhv.csv`.

use super::{uhv_link, Coords, Link, Network, NetworkError, Node, NodeId, NodeKind, OriginTag, UhvRecord, UhvType};
use crate::io::read_table;
use crate::years::Year;
use std::collections::BTreeMap;
use std::path::Path;

const NODE_COLUMNS: &[&str] = &[
    "id",
    "kind",
    "lat",
    "lon",
    "province",
    "country",
    "conv_eff",
    "rail_line",
    "ocean_navigable",
];
const NODE_YEAR_PREFIXES: &[&str] = &["port_capa", "stpt_capa"];

const LINK_COLUMNS: &[&str] = &["from", "to", "mode", "distance_km", "bidirectional", "line", "conv_eff"];
const LINK_YEAR_PREFIXES: &[&str] = &["capacity", "elec_capa"];

const UHV_COLUMNS: &[&str] = &[
    "from_province",
    "to_province",
    "length_km",
    "type",
    "nameplate_PJ",
    "origin_tag",
    "start_year",
];

fn enum_err(row: &crate::io::Row<'_>, e: NetworkError) -> NetworkError {
    NetworkError::Io(row.err(e.to_string()))
}

pub fn load_nodes(path: &Path) -> Result<(Vec<Node>, Vec<String>), NetworkError> {
    let mut nodes = Vec::new();
    let mut failure = None;
    let warnings = read_table(path, NODE_COLUMNS, NODE_YEAR_PREFIXES, |row| {
        let kind: NodeKind = match row.required("kind")?.parse() {
            Ok(k) => k,
            Err(e) => {
                failure = Some(enum_err(row, e));
                return Err(row.err("unknown node kind"));
            }
        };
        let mut node = Node::new(row.required("id")?, kind);
        node.coords = match (row.f64_opt("lat")?, row.f64_opt("lon")?) {
            (Some(lat), Some(lon)) => Some(Coords { lat, lon }),
            (None, None) => None,
            _ => return Err(row.err("lat and lon must be given together")),
        };
        node.province = row.get("province").unwrap_or_default().to_string();
        if let Some(c) = row.get("country") {
            node.country = c.to_string();
        }
        node.conv_eff = row.f64_opt("conv_eff")?;
        node.rail_line = row.get("rail_line").map(str::to_string);
        node.ocean_navigable = row.bool_opt("ocean_navigable")?;
        node.port_capa = row.series("port_capa")?;
        node.stpt_capa = row.series("stpt_capa")?;
        nodes.push(node);
        Ok(())
    });
    match (warnings, failure) {
        (_, Some(e)) => Err(e),
        (Ok(w), None) => Ok((nodes, w)),
        (Err(e), None) => Err(e.into()),
    }
}

pub fn load_links(path: &Path) -> Result<(Vec<Link>, Vec<String>), NetworkError> {
    let mut links = Vec::new();
    let mut failure = None;
    let warnings = read_table(path, LINK_COLUMNS, LINK_YEAR_PREFIXES, |row| {
        let mode = match row.required("mode")?.parse() {
            Ok(m) => m,
            Err(e) => {
                failure = Some(enum_err(row, e));
                return Err(row.err("unknown transport mode"));
            }
        };
        let mut link = Link::new(row.required("from")?, row.required("to")?, mode, row.f64("distance_km")?);
        link.bidirectional = row.bool_opt("bidirectional")?.unwrap_or(true);
        link.line = row.get("line").map(str::to_string);
        link.conv_eff = row.f64_opt("conv_eff")?;
        link.transp_capa = row.series("capacity")?;
        link.elec_capa = row.series("elec_capa")?;
        links.push(link);
        Ok(())
    });
    match (warnings, failure) {
        (_, Some(e)) => Err(e),
        (Ok(w), None) => Ok((links, w)),
        (Err(e), None) => Err(e.into()),
    }
}

pub fn load_uhv(path: &Path) -> Result<(Vec<UhvRecord>, Vec<String>), NetworkError> {
    let mut records = Vec::new();
    let mut failure = None;
    let warnings = read_table(path, UHV_COLUMNS, &[], |row| {
        let line_type = match row.required("type")?.to_ascii_uppercase().as_str() {
            "AC" => UhvType::Ac,
            "DC" => UhvType::Dc,
            other => {
                failure = Some(enum_err(
                    row,
                    NetworkError::UnknownEnum {
                        what: "UHV line type",
                        value: other.to_string(),
                    },
                ));
                return Err(row.err("unknown UHV line type"));
            }
        };
        let origin: OriginTag = match row.get("origin_tag").unwrap_or("").parse() {
            Ok(o) => o,
            Err(e) => {
                failure = Some(enum_err(row, e));
                return Err(row.err("unknown origin tag"));
            }
        };
        let start_year = row
            .get("start_year")
            .map(|s| s.parse::<Year>().map_err(|_| row.err(format!("bad start_year {s}"))))
            .transpose()?;
        records.push(UhvRecord {
            from_province: row.required("from_province")?.to_string(),
            to_province: row.required("to_province")?.to_string(),
            length_km: row.f64("length_km")?,
            line_type,
            nameplate_pj: row.f64("nameplate_PJ")?,
            origin,
            start_year,
        });
        Ok(())
    });
    match (warnings, failure) {
        (_, Some(e)) => Err(e),
        (Ok(w), None) => Ok((records, w)),
        (Err(e), None) => Err(e.into()),
    }
}

/// Loads a network directory: `nodes.csv`, `links.csv` and, if present,
/// `uhv.csv`. UHV records become links between provincial power demand nodes.
pub fn load_network(dir: &Path, years: Vec<Year>) -> Result<(Network, Vec<String>), NetworkError> {
    let (nodes, mut warnings) = load_nodes(&dir.join("nodes.csv"))?;
    let (mut links, w) = load_links(&dir.join("links.csv"))?;
    warnings.extend(w);
    let uhv_path = dir.join("uhv.csv");
    if uhv_path.exists() {
        let (records, w) = load_uhv(&uhv_path)?;
        warnings.extend(w);
        let demand_node_of: BTreeMap<String, NodeId> = nodes
            .iter()
            .filter(|n| n.kind == NodeKind::ProvPowerDemand)
            .map(|n| (n.province.clone(), n.id.clone()))
            .collect();
        let first_year = years.first().copied().unwrap_or(2015);
        for record in &records {
            links.push(uhv_link(record, &demand_node_of, first_year)?);
        }
    }
    Ok((Network::from_parts(nodes, links, years)?, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::TransportMode;
    use std::fs;

    fn write(dir: &Path, name: &str, body: &str) {
        fs::write(dir.join(name), body).unwrap();
    }

    #[test]
    fn loads_small_network_with_uhv() {
        let dir = tempfile::tempdir().unwrap();
        write(
            dir.path(),
            "nodes.csv",
            "id,kind,lat,lon,province,country,conv_eff,port_capa_2015,port_capa_2020,notes\n\
             qhd,port,39.9,119.6,HE,CN,,200,250,big\n\
             pd_nm,prov_power_demand,,,NM,CN,,,,\n\
             pd_js,prov_power_demand,,,JS,CN,,,,\n",
        );
        write(
            dir.path(),
            "links.csv",
            "from,to,mode,distance_km,bidirectional,capacity_2015\nqhd,pd_nm,truck,10,false,\n",
        );
        write(
            dir.path(),
            "uhv.csv",
            "from_province,to_province,length_km,type,nameplate_PJ,origin_tag\nNM,JS,2000,DC,100,mixed\n",
        );
        let (net, warnings) = load_network(dir.path(), vec![2015, 2020]).unwrap();
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("notes"));
        let qhd = net.node(&"qhd".into()).unwrap();
        assert_eq!(qhd.port_capa.at(2019), Some(200.0));
        assert_eq!(qhd.port_capa.at(2021), Some(250.0));
        let uhv = net.links.iter().find(|l| l.mode == TransportMode::Uhv).unwrap();
        assert!((uhv.conv_eff.unwrap() - 0.944).abs() < 1e-12);
        assert_eq!(uhv.elec_capa.at(2020), Some(50.0));
        assert!(!uhv.bidirectional);
    }

    #[test]
    fn unknown_kind_is_hard_error() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "nodes.csv", "id,kind\nx,spaceport\n");
        let err = load_nodes(&dir.path().join("nodes.csv")).unwrap_err();
        assert!(err.to_string().contains("spaceport"), "{err}");
    }

    #[test]
    fn unknown_origin_tag_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write(
            dir.path(),
            "uhv.csv",
            "from_province,to_province,length_km,type,nameplate_PJ,origin_tag\nA,B,100,AC,10,hydrogen\n",
        );
        assert!(load_uhv(&dir.path().join("uhv.csv")).is_err());
    }
}
