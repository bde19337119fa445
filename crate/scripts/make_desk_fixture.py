#!/usr/bin/env python3
"""Writes the synthetic desk bundle under crates/core/fixtures/desk.

All numbers are invented at desk scale. Re-run after editing; the output is
deterministic.
"""

import csv
import os
import sys

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "crates", "core", "fixtures", "desk")
YEARS = list(range(2015, 2020))

PROVINCES = {
    # province: coastal, gdp index, population, hdd, steel weight
    "SX": (False, 0.7, 37, 3000, 15),
    "NM": (False, 1.0, 25, 4200, 0),
    "HB": (False, 1.0, 59, 1800, 15),
    "HE": (True, 0.7, 75, 2600, 30),
    "LN": (True, 0.8, 43, 3400, 10),
    "SD": (True, 1.0, 100, 2200, 10),
    "JS": (True, 1.6, 80, 1600, 5),
    "GD": (True, 1.5, 113, None, 5),
}

NODES = []


def node(id, kind, lat=None, lon=None, province="", country="CN", conv_eff=None, rail_line=None,
         ocean_navigable=None, port_capa=None, stpt_capa=None):
    NODES.append(dict(id=id, kind=kind, lat=lat, lon=lon, province=province, country=country,
                      conv_eff=conv_eff, rail_line=rail_line, ocean_navigable=ocean_navigable,
                      port_capa=port_capa or {}, stpt_capa=stpt_capa or {}))


LINKS = []


def link(a, b, mode, km, capacity=None, line=None, one_way=False):
    LINKS.append(dict(frm=a, to=b, mode=mode, km=km, capacity=capacity or {}, line=line,
                      bidirectional=not one_way))


# mines
node("sx_north", "mine", 40.0, 113.1, "SX")
node("sx_south", "mine", 36.2, 113.1, "SX")
node("nm_ordos", "mine", 39.6, 109.8, "NM")
node("nm_small", "mine", 40.4, 110.3, "NM")
node("au_newcastle", "mine", -32.9, 151.8, "", "AU")
node("au_bowen", "mine", -21.3, 149.3, "", "AU")
node("id_kalimantan", "mine", -1.2, 116.8, "", "ID")
node("ru_vostochny", "mine", 42.7, 133.0, "", "RU")
node("mn_ntt", "mine", 43.6, 105.5, "", "MN")
node("mn_baganuur", "mine", 47.7, 108.3, "", "MN")
node("ca_elk", "mine", 49.0, -123.1, "", "CA")
node("ph_semirara", "mine", 12.1, 121.4, "", "PH")
node("za_richards_bay", "mine", -28.8, 32.0, "", "ZA")

# railway stops
node("rs_datong", "railway_stop", 40.09, 113.3, "SX", rail_line="daqin")
node("rs_shijiazhuang", "railway_stop", 38.05, 114.48, "HE", rail_line="shitai")
node("rs_jinan", "railway_stop", 36.67, 117.0, "SD", rail_line="jiaoji")
node("rs_xuzhou", "railway_stop", 34.26, 117.18, "JS", rail_line="longhai")
node("rs_baotou", "railway_stop", 40.65, 109.84, "NM", rail_line="jingbao")
node("rs_haolebaoji", "railway_stop", 39.3, 109.2, "NM", rail_line="haoji")
node("rs_jingzhou", "railway_stop", 30.35, 112.2, "HB", rail_line="haoji")
node("rs_ganqimaodu", "railway_stop", 41.6, 107.8, "NM", rail_line="ganquan")
node("rs_erenhot", "railway_stop", 43.65, 111.98, "NM", rail_line="jier")

# ports
node("port_qhd", "port", 39.93, 119.6, "HE", port_capa={2015: 150, 2020: 300})
node("port_caofeidian", "port", 38.95, 118.5, "HE", port_capa={2015: 100, 2020: 150})
node("port_yingkou", "port", 40.67, 122.23, "LN", port_capa={2015: 80, 2020: 100})
node("port_rizhao", "port", 35.4, 119.5, "SD", port_capa={2015: 80, 2020: 120})
node("port_lyg", "port", 34.6, 119.2, "JS", port_capa={2015: 60, 2020: 90})
node("port_guangzhou", "port", 23.1, 113.5, "GD", port_capa={2015: 100, 2020: 140})

# waterways
node("wp_bohai", "nav_waypoint_ocean", 39.0, 120.5)
node("wp_yellow", "nav_waypoint_ocean", 35.0, 121.5)
node("wp_east", "nav_waypoint_ocean", 31.0, 123.0)
node("wp_south", "nav_waypoint_ocean", 22.0, 114.5)
node("wp_nanjing", "nav_waypoint_river", 32.1, 118.7, "JS", ocean_navigable=True)
node("wp_wuhan", "nav_waypoint_river", 30.6, 114.4, "HB", ocean_navigable=False)

CITIES = {
    "SX": ("city_taiyuan", 37.87, 112.55),
    "NM": ("city_hohhot", 40.84, 111.75),
    "HB": ("city_wuhan", 30.59, 114.3),
    "HE": ("city_shijiazhuang", 38.04, 114.5),
    "LN": ("city_shenyang", 41.8, 123.4),
    "SD": ("city_jinan", 36.65, 117.12),
    "JS": ("city_nanjing", 32.06, 118.8),
    "GD": ("city_guangzhou", 23.13, 113.26),
}
PLANTS = {
    "SX": (37.9, 112.6, 0.37),
    "NM": (39.8, 110.0, 0.36),
    "HB": (30.5, 114.1, 0.39),
    "HE": (38.9, 115.5, 0.38),
    "LN": (41.5, 123.0, 0.38),
    "SD": (36.3, 117.5, 0.39),
    "JS": (34.5, 119.0, 0.40),
    "GD": (23.0, 113.4, 0.41),
}
for p, (cid, lat, lon) in CITIES.items():
    node(cid, "city_center", lat, lon, p)
    plat, plon, eff = PLANTS[p]
    node(f"pp_{p.lower()}", "power_plant", plat, plon, p, conv_eff=eff)
    node(f"pd_{p.lower()}", "prov_power_demand", province=p)
    if PROVINCES[p][4] > 0:
        node(f"psd_{p.lower()}", "prov_steel_demand", province=p)
    link(f"pp_{p.lower()}", f"pd_{p.lower()}", "functional", 0, one_way=True)

# steel plants; capacities in Mt/yr
STEEL = [
    ("st_sx", "SX", 37.85, 112.5, {2015: 12, 2018: 14, 2021: 16}),
    ("st_hb", "HB", 30.6, 114.45, {2015: 12, 2018: 14, 2021: 16}),
    ("st_he_port", "HE", 38.95, 118.45, {2015: 14, 2019: 16}),
    ("st_he_in", "HE", 36.6, 114.5, {2015: 16}),
    ("st_ln_port", "LN", 40.3, 122.1, {2015: 6}),
    ("st_ln_in", "LN", 41.1, 122.99, {2015: 7}),
    ("st_sd_port", "SD", 35.35, 119.45, {2015: 5, 2018: 7}),
    ("st_sd_in", "SD", 36.7, 117.2, {2015: 6}),
    ("st_js_port", "JS", 31.9, 120.5, {2015: 4}),
    ("st_js_in", "JS", 34.3, 117.3, {2015: 3}),
    ("st_gd_port", "GD", 23.05, 113.55, {2015: 4}),
    ("st_gd_in", "GD", 24.8, 113.6, {2015: 3}),
]
for sid, p, lat, lon, cap in STEEL:
    node(sid, "steel_plant", lat, lon, p, stpt_capa=cap)
    link(sid, f"psd_{p.lower()}", "functional", 0, one_way=True)

# domestic rail
link("sx_north", "rs_datong", "rail", 60)
link("rs_datong", "port_qhd", "rail", 650, {2015: 100, 2018: 130}, line="daqin")
link("rs_datong", "port_caofeidian", "rail", 720, {2015: 30, 2020: 60}, line="zhunchi")
link("rs_datong", "city_taiyuan", "rail", 300)
link("sx_south", "city_taiyuan", "rail", 200)
link("sx_south", "pp_sx", "rail", 50, one_way=True)
link("sx_south", "st_sx", "rail", 60, one_way=True)
link("sx_south", "rs_shijiazhuang", "rail", 250, {2015: 60, 2020: 70}, line="shitai")
link("sx_south", "city_wuhan", "rail", 900, line="jingguang")
link("rs_shijiazhuang", "city_shijiazhuang", "rail", 10)
link("rs_shijiazhuang", "pp_he", "rail", 150, one_way=True)
link("rs_shijiazhuang", "st_he_in", "rail", 180, one_way=True)
link("rs_shijiazhuang", "rs_jinan", "rail", 300)
link("rs_jinan", "city_jinan", "rail", 10)
link("rs_jinan", "pp_sd", "rail", 80, one_way=True)
link("rs_jinan", "st_sd_in", "rail", 20, one_way=True)
link("rs_jinan", "port_rizhao", "rail", 330, {2015: 40, 2020: 60}, line="wari")
link("rs_jinan", "rs_xuzhou", "rail", 320)
link("rs_xuzhou", "st_js_in", "rail", 15, one_way=True)
link("rs_xuzhou", "port_lyg", "rail", 200)
link("nm_ordos", "rs_baotou", "rail", 150)
link("nm_ordos", "pp_nm", "rail", 30, one_way=True)
link("nm_ordos", "rs_haolebaoji", "rail", 80)
link("nm_small", "rs_baotou", "rail", 40)
link("nm_small", "pp_nm", "rail", 20, one_way=True)
link("rs_baotou", "rs_datong", "rail", 450, {2015: 80, 2020: 120}, line="jingbao")
link("rs_baotou", "city_hohhot", "rail", 160)
link("rs_baotou", "rs_ganqimaodu", "rail", 350)
link("rs_erenhot", "rs_datong", "rail", 500, line="jier")
link("rs_haolebaoji", "rs_jingzhou", "rail", 1000, {2015: 0, 2020: 60}, line="haoji")
link("rs_jingzhou", "city_wuhan", "rail", 220)
link("rs_jingzhou", "pp_hb", "rail", 230, one_way=True)
link("rs_jingzhou", "city_guangzhou", "rail", 1000, line="jingguang")
link("city_wuhan", "st_hb", "rail", 15, one_way=True)
link("port_qhd", "city_shenyang", "rail", 400)
link("port_yingkou", "city_shenyang", "rail", 200)
link("port_yingkou", "pp_ln", "rail", 100, one_way=True)
link("port_yingkou", "st_ln_port", "rail", 20, one_way=True)
link("city_shenyang", "st_ln_in", "rail", 100, one_way=True)
link("port_caofeidian", "st_he_port", "rail", 10, one_way=True)
link("port_caofeidian", "city_shijiazhuang", "rail", 350)
link("port_rizhao", "st_sd_port", "rail", 10, one_way=True)
link("port_lyg", "city_nanjing", "rail", 300)
link("port_lyg", "pp_js", "rail", 50, one_way=True)
link("port_guangzhou", "pp_gd", "rail", 50, one_way=True)
link("port_guangzhou", "st_gd_port", "rail", 10, one_way=True)
link("city_guangzhou", "st_gd_in", "rail", 220, one_way=True)

# Mongolian border
link("mn_ntt", "rs_ganqimaodu", "rail", 250, {2015: 2, 2022: 30}, line="ganquan")
link("mn_ntt", "rs_ganqimaodu", "truck", 250)
link("mn_baganuur", "rs_erenhot", "rail", 700, {2015: 10}, line="jier")

# trucks
link("sx_north", "city_shijiazhuang", "truck", 400)
link("nm_ordos", "city_hohhot", "truck", 250)
link("port_guangzhou", "city_guangzhou", "truck", 30)

# waterways
link("wp_nanjing", "st_js_port", "river_barge", 20, one_way=True)
link("wp_nanjing", "city_nanjing", "truck", 10)
link("wp_nanjing", "wp_wuhan", "river_barge", 700)
link("wp_wuhan", "city_wuhan", "truck", 10)
link("port_qhd", "wp_bohai", "ocean_ship", 80)
link("port_caofeidian", "wp_bohai", "ocean_ship", 100)
link("port_yingkou", "wp_bohai", "ocean_ship", 200)
link("wp_bohai", "wp_yellow", "ocean_ship", 500)
link("port_rizhao", "wp_yellow", "ocean_ship", 150)
link("port_lyg", "wp_yellow", "ocean_ship", 150)
link("wp_yellow", "wp_east", "ocean_ship", 500)
link("wp_east", "wp_nanjing", "ocean_ship", 350)
link("wp_east", "wp_south", "ocean_ship", 1300)
link("port_guangzhou", "wp_south", "ocean_ship", 150)

# seaborne imports
link("au_newcastle", "wp_south", "ocean_ship", 7000)
link("au_bowen", "wp_south", "ocean_ship", 6000)
link("id_kalimantan", "wp_south", "ocean_ship", 2500)
link("ph_semirara", "wp_south", "ocean_ship", 1200)
link("ru_vostochny", "wp_bohai", "ocean_ship", 1500)
link("ca_elk", "wp_east", "ocean_ship", 9500)
link("za_richards_bay", "wp_south", "ocean_ship", 11000)

UHV = [
    ("SX", "JS", 700, "AC", 150, "mixed", 2016),
    ("NM", "JS", 1200, "DC", 200, "coal", 2017),
    ("NM", "SD", 800, "DC", 250, "coal", 2019),
    ("HB", "GD", 900, "DC", 100, "renewable", ""),
]

# supply steps: mine, node, country, type, cv, csr, reserves, capacity by year, cost by year
SUPPLY = [
    ("sx_north", "sx_north", "CN", "thermal", 5500, "", 2000, {2015: 80, 2017: 85, 2019: 90, 2025: 95}, {2015: 38, 2019: 40}),
    ("sx_south", "sx_south", "CN", "thermal", 5000, "", 1200, {2015: 60}, {2015: 34}),
    ("sx_coking", "sx_south", "CN", "hcc", "", 60, 900, {2015: 25}, {2015: 110}),
    ("sx_coking", "sx_south", "CN", "scc", "", 52, 900, {2015: 15}, {2015: 85}),
    ("sx_coking", "sx_south", "CN", "pci", "", 45, 900, {2015: 15}, {2015: 80}),
    ("nm_ordos", "nm_ordos", "CN", "thermal", 5500, "", 5000, {2015: 120, 2018: 140, 2020: 150, 2025: 170}, {2015: 22, 2020: 24}),
    ("nm_small", "nm_small", "CN", "thermal", 4500, "", 20, {2015: 5}, {2015: 6}),
    ("au_newcastle", "au_newcastle", "AU", "thermal", 6000, "", 3000, {2015: 100}, {2015: 42, 2019: 44}),
    ("au_bowen", "au_bowen", "AU", "hcc", "", 70, 2500, {2015: 30}, {2015: 125}),
    ("au_bowen", "au_bowen", "AU", "scc", "", 58, 2500, {2015: 10}, {2015: 95}),
    ("au_bowen", "au_bowen", "AU", "pci", "", 50, 2500, {2015: 10}, {2015: 90}),
    ("id_kalimantan", "id_kalimantan", "ID", "thermal", 4500, "", 3000, {2015: 50, 2019: 60}, {2015: 24, 2019: 25}),
    ("ru_vostochny", "ru_vostochny", "RU", "thermal", 6000, "", 1500, {2015: 20, 2019: 30}, {2015: 45}),
    ("mn_ntt", "mn_ntt", "MN", "hcc", "", 60, 1500, {2015: 5, 2017: 10, 2019: 15}, {2015: 55}),
    ("mn_baganuur", "mn_baganuur", "MN", "thermal", 5000, "", 600, {2015: 10}, {2015: 25}),
    ("ca_elk", "ca_elk", "CA", "hcc", "", 68, 1000, {2015: 10}, {2015: 135}),
    ("ph_semirara", "ph_semirara", "PH", "thermal", 4500, "", 300, {2015: 10}, {2015: 32}),
    ("za_richards_bay", "za_richards_bay", "ZA", "thermal", 6000, "", 1000, {2015: 10}, {2015: 58}),
]

NATIONAL = {
    # year: power TWh, steel Mt, building, chemicals, heating, other (PJ), fleet eff
    2015: (440, 52, 650, 350, 300, 800, 0.370),
    2016: (450, 54, 640, 360, 300, 780, 0.372),
    2017: (470, 56, 630, 370, 300, 760, 0.375),
    2018: (490, 58, 620, 390, 300, 730, 0.378),
    2019: (500, 60, 600, 400, 300, 700, 0.380),
}

GENERATION = {
    # province: thermal TWh 2015, 2019; gas share of thermal
    "SX": (70, 80, 0.02),
    "NM": (90, 105, 0.01),
    "HB": (50, 55, 0.03),
    "HE": (65, 70, 0.03),
    "LN": (40, 42, 0.02),
    "SD": (110, 120, 0.02),
    "JS": (120, 130, 0.08),
    "GD": (100, 110, 0.15),
}
GROWTH = {"SX": 0.02, "NM": 0.035, "HB": 0.025, "HE": 0.015, "LN": 0.01, "SD": 0.02, "JS": 0.022, "GD": 0.025}

EXPANSIONS = {
    "australia": [
        ("au_newcastle", "AU", "committed", 2021, 15, "", ""),
        ("au_bowen", "AU", "feasible", 2023, 12, "", 120),
    ],
    "mongolia": [
        ("mn_ntt", "MN", "committed", 2020, "", 45, ""),
    ],
}

ACTUALS = {
    # year: AU, ID, RU, MN, CA, PH, RoW
    2015: (48, 60, 12, 8, 3, 4, 2),
    2016: (52, 65, 14, 12, 3, 4, 2),
    2017: (55, 70, 16, 14, 4, 5, 3),
    2018: (58, 75, 18, 16, 4, 5, 3),
    2019: (60, 78, 20, 18, 5, 6, 3),
}


def fmt(v):
    if v is None or v == "":
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write(path, header, rows):
    full = os.path.join(ROOT, path)
    os.makedirs(os.path.dirname(full), exist_ok=True)
    with open(full, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(x) for x in r])


def year_cols(rows, key, prefix):
    years = sorted({y for r in rows for y in r[key]})
    return years, [f"{prefix}_{y}" for y in years]


def main():
    port_years, port_cols = year_cols(NODES, "port_capa", "port_capa")
    st_years, st_cols = year_cols(NODES, "stpt_capa", "stpt_capa")
    write("network/nodes.csv",
          ["id", "kind", "lat", "lon", "province", "country", "conv_eff", "rail_line", "ocean_navigable"] + port_cols + st_cols,
          [[n["id"], n["kind"], n["lat"], n["lon"], n["province"], n["country"], n["conv_eff"], n["rail_line"],
            n["ocean_navigable"]] + [n["port_capa"].get(y) for y in port_years] + [n["stpt_capa"].get(y) for y in st_years]
           for n in NODES])
    cap_years, cap_cols = year_cols(LINKS, "capacity", "capacity")
    write("network/links.csv",
          ["from", "to", "mode", "distance_km", "bidirectional", "line"] + cap_cols,
          [[l["frm"], l["to"], l["mode"], l["km"], l["bidirectional"], l["line"]] + [l["capacity"].get(y) for y in cap_years]
           for l in LINKS])
    write("network/uhv.csv",
          ["from_province", "to_province", "length_km", "type", "nameplate_PJ", "origin_tag", "start_year"], UHV)

    cy = sorted({y for s in SUPPLY for y in s[7]})
    ky = sorted({y for s in SUPPLY for y in s[8]})
    write("supply.csv",
          ["mine_id", "node_id", "country", "coal_type", "cv", "csr", "reserves_Mt"]
          + [f"capacity_{y}" for y in cy] + [f"cost_{y}" for y in ky],
          [list(s[:7]) + [s[7].get(y) for y in cy] + [s[8].get(y) for y in ky] for s in SUPPLY])

    rows = []
    for y, (power, steel, bm, ch, heat, other, eff) in NATIONAL.items():
        elec_pj = power * 3.6
        rows += [
            ("power_gen", y, power, "TWh"),
            ("steel", y, steel, "Mt"),
            ("building_materials", y, bm, "PJ"),
            ("chemicals", y, ch, "PJ"),
            ("heating", y, heat, "PJ"),
            ("other", y, other, "PJ"),
            ("power_industry", y, round(elec_pj / eff - 120.0, 3), "PJ"),
            ("fleet_efficiency", y, eff, "fraction"),
        ]
    write("demand/demand_national.csv", ["sector", "year", "qty", "unit"], rows)

    rows = []
    for y in YEARS:
        t = (y - 2015) / 4
        for p, (a, b, gas) in GENERATION.items():
            thermal = a + (b - a) * t
            rows.append((p, y, round(thermal, 3), round(thermal * gas, 3), round(thermal * 0.01, 3)))
    write("demand/power_generation.csv", ["province", "year", "thermal_TWh", "gas_TWh", "biomass_TWh"], rows)
    write("demand/growth_rates.csv", ["province", "sector", "rate"],
          [(p, "power_gen", r) for p, r in GROWTH.items()])
    write("demand/provinces.csv", ["province", "coastal", "gdp_index"],
          [(p, v[0], v[1]) for p, v in PROVINCES.items()])

    write("demand/proxies/building_materials.csv", ["sector", "region", "weight"],
          [("building_materials", p, round(v[2] * v[1], 3)) for p, v in PROVINCES.items()])
    write("demand/proxies/chemicals.csv", ["sector", "region", "weight"],
          [("chemicals", p, round(v[2] * (2.0 if p in ("NM", "SX", "SD") else 1.0), 3)) for p, v in PROVINCES.items()])
    write("demand/proxies/population.csv", ["sector", "region", "weight"],
          [("population", p, v[2]) for p, v in PROVINCES.items()])
    write("demand/proxies/steel.csv", ["sector", "region", "weight"],
          [("steel", p, v[4]) for p, v in PROVINCES.items() if v[4] > 0])
    write("demand/proxies/hdd.csv", ["sector", "region", "weight", "neighbour"],
          [("heating", p, v[3], "" if v[3] is not None else "HB") for p, v in PROVINCES.items()])
    write("demand/proxies/city_gdp.csv", ["sector", "region", "weight"],
          [("city", cid, 1.0) for cid, _, _ in CITIES.values()])

    for name, rows in EXPANSIONS.items():
        write(f"expansions/{name}.csv", ["mine_id", "country", "status", "from_year", "added_Mt", "total_Mt", "cost"], rows)

    origins = ["Australia", "Indonesia", "Russia", "Mongolia", "Canada", "Philippines", "RestOfWorld"]
    write("actuals.csv", ["year", "origin", "imports_Mt"],
          [(y, o, v) for y, vals in ACTUALS.items() for o, v in zip(origins, vals)])

    with open(os.path.join(ROOT, "model.toml"), "w") as f:
        f.write("# Synthetic desk-scale bundle; every figure is invented.\n\n")
        f.write("[settings]\n")
        f.write("years = [" + ", ".join(str(y) for y in range(2015, 2031)) + "]\n")
        f.write('demand_preset = "sps"\n')
        f.write('key_ports = ["port_qhd", "port_caofeidian", "port_rizhao"]\n')
        f.write("inland_steel_margin = 0.05\n")


if __name__ == "__main__":
    sys.exit(main())
