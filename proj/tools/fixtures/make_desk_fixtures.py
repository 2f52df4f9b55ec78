#!/usr/bin/env python3
# Copyright 2026 The moldchat Authors
# SPDX-License-Identifier: Apache-2.0
"""Generates the scripted-backend corpus used by the desk demo and the tests.

Writes data/fixtures/desk.json, data/fixtures/search.json,
data/suites/desk.suite.json, data/suites/hybrid.suite.json,
data/suites/multilingual.json and data/suites/desk.human.json.
Every rule is keyed on the exact query text, so the output is a pure
function of the request.
"""

import csv
import json
import pathlib

ROOT = pathlib.Path(__file__).resolve().parents[2]
DATA = ROOT / "data"

META = set("\\^$.|?*+()[]{}")


def lit(s):
    """Escapes a literal for an ECMAScript regex."""
    return "".join("\\" + c if c in META else c for c in s)


PARAMS = ["Injection Speed 1", "Injection Speed 2", "Injection Speed 3", "Injection Pressure 1",
          "Injection Pressure 2", "Injection Pressure 3", "Injection Position 1", "Injection Position 2",
          "Injection Position 3", "Hold Time"]
PARAM_PATTERNS = [lit(p) + r": ([0-9.]+)" for p in PARAMS] + [r"predicted good probability ([0-9.]+)"]


def load_table():
    def rows(name):
        with open(DATA / "knowledge" / name, newline="", encoding="utf-8") as f:
            return list(csv.reader(f))
    directions = rows("table_directions.csv")
    priorities = rows("table_priorities.csv")
    header = directions[0][1:]
    table = {}
    for d, p in zip(directions[1:], priorities[1:]):
        names = d[0].split("|")
        order = []
        for col, (sign, prio) in enumerate(zip(d[1:], p[1:])):
            if prio.strip():
                order.append((int(prio), header[col], "Increase" if sign.strip() == "+" else "Decrease"))
        order.sort(key=lambda t: t[0])
        table[names[0]] = {"aliases": names, "order": order}
    return table


TABLE = load_table()


def adjustment_listing(defect):
    lines = ["Parameter Adjustments (sorted by adjustment order):"]
    for prio, param, verb in TABLE[defect]["order"]:
        lines.append(f"(Priority: {prio}) → ({param}, {verb})")
    return "\n".join(lines)


def numbered_adjustments(defect, verbs=None, names=None):
    verbs = verbs or {"Increase": "increase", "Decrease": "decrease"}
    out = []
    for i, (_, param, verb) in enumerate(TABLE[defect]["order"], 1):
        label = f"{names[param]} ({param})" if names else param
        out.append(f"{i}. {label}: {verbs[verb]}")
    return "\n".join(out)


def diffusion_block(intro, labels=None):
    lines = [intro]
    for i, p in enumerate(PARAMS, 1):
        label = f"{labels[p]} ({p})" if labels else p
        lines.append(f"- {label}: {{{{{i}}}}}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Tasks
# ---------------------------------------------------------------------------

ENV_D1 = "machine temperature 20.5 C, machine humidity 42.0 %, factory temperature 24.0 C, factory humidity 36.0 %"


def env_json(mt, mh, ft, fh, cls=0):
    return json.dumps({"machine_temperature": mt, "machine_humidity": mh, "factory_temperature": ft,
                       "factory_humidity": fh, "class": cls})


def table_task(tid, query, defect, task, judge):
    return {
        "id": tid, "category": "table", "query": query, "tools": ["table_retriever"],
        "plan": [["table_retriever", task]],
        "report": {"English": f"To remove {defect.lower()}, adjust the process parameters in this order "
                              f"(smallest priority first):\n{numbered_adjustments(defect)}\n"
                              "Change one parameter at a time and check the next shot before moving on."},
        "judge": judge,
    }


def manual_task(tid, query, task, answer, page, judge):
    return {
        "id": tid, "category": "manual", "query": query, "tools": ["manual_retriever"],
        "plan": [["manual_retriever", task]],
        "manual": {"match": task, "answer": f"Answer: {answer}\nReference: See page {page} for detail."},
        "report": {"English": f"{answer} See page {page} of the machine manual for detail."},
        "judge": judge,
    }


def diffusion_task(tid, query, task, env, judge, missing=None):
    report = (diffusion_block("Recommended process conditions (best of 64 candidates, predicted good "
                              "probability {{11}}):") +
              "\nStart from these values and fine-tune while watching the first shots.")
    patterns = PARAM_PATTERNS
    if missing:
        report = (f"I cannot generate process conditions yet because the {missing} is missing. "
                  f"Please tell me the {missing} so that all four environment readings are known.")
        patterns = []
    return {
        "id": tid, "category": "diffusion", "query": query, "tools": ["diffusion_model"],
        "plan": [["diffusion_model", task]],
        "formatter": {"match": task, "json": env},
        "report": {"English": report}, "report_patterns": patterns,
        "judge": judge,
    }


def general_task(tid, query, answer, judge, search=None):
    t = {"id": tid, "category": "general", "query": query, "tools": ["internet_search"] if search else [],
         "answer": answer, "judge": judge}
    if search:
        t["search"] = search
    return t


JAPAN_MAKERS = {
    "action_input": "Japanese injection molding machine manufacturers",
    "results": [
        {"title": "Sumitomo (SHI) Demag injection molding machines", "url": "https://example.org/makers/sumitomo-shi-demag",
         "snippet": "Sumitomo (SHI) Demag builds all-electric and hydraulic injection molding machines."},
        {"title": "Nissei Plastic Industrial", "url": "https://example.org/makers/nissei",
         "snippet": "Nissei is a Japanese maker of hybrid and all-electric injection molding machines."},
        {"title": "Shibaura Machine (formerly Toshiba Machine)", "url": "https://example.org/makers/shibaura",
         "snippet": "Shibaura Machine, formerly Toshiba Machine, produces injection molding machines."},
        {"title": "FANUC ROBOSHOT", "url": "https://example.org/makers/fanuc-roboshot",
         "snippet": "FANUC sells the ROBOSHOT series of all-electric injection molding machines."},
        {"title": "The Japan Steel Works (JSW)", "url": "https://example.org/makers/jsw",
         "snippet": "JSW manufactures large and all-electric injection molding machines."},
    ],
    "summary": "Japanese injection molding machine makers named in the results: Sumitomo (SHI) Demag "
               "(https://example.org/makers/sumitomo-shi-demag), Nissei (https://example.org/makers/nissei), "
               "Shibaura Machine, formerly Toshiba (https://example.org/makers/shibaura), FANUC "
               "(https://example.org/makers/fanuc-roboshot) and JSW (https://example.org/makers/jsw).",
}
JAPAN_ANSWER = ("Major Japanese injection molding machine manufacturers include Sumitomo (SHI) Demag, Nissei, "
                "Shibaura Machine (formerly Toshiba Machine), FANUC and JSW (The Japan Steel Works). "
                "Sources: example.org/makers pages for each company.")

ELECTRIC_TRENDS = {
    "action_input": "all-electric injection molding machine trends",
    "results": [
        {"title": "All-electric machines gain share", "url": "https://example.org/news/all-electric-share",
         "snippet": "Makers report rising demand for all-electric machines driven by energy savings and precision."},
        {"title": "Servo drives and monitoring", "url": "https://example.org/news/servo-monitoring",
         "snippet": "New models add servo-driven clamps and built-in process monitoring with networked data."},
    ],
    "summary": "The results describe two trends: growing demand for all-electric machines because of energy "
               "savings and precision (https://example.org/news/all-electric-share), and servo-driven clamps "
               "with built-in process monitoring (https://example.org/news/servo-monitoring).",
}
ELECTRIC_ANSWER = ("Current trends in all-electric injection molding machines are rising adoption for energy "
                   "savings and precision, plus servo-driven clamps with built-in, networked process monitoring. "
                   "Sources: example.org/news/all-electric-share and example.org/news/servo-monitoring.")


def hybrid_search(action_input, title, url, snippet, summary):
    return {"action_input": action_input, "results": [{"title": title, "url": url, "snippet": snippet}],
            "summary": summary}


DESK = [
    table_task("table-01", "Our parts show burr along the parting line. Which process parameters should I adjust "
               "and in what order?", "Burr", "Retrieve the process parameter adjustments for the burr defect", 9),
    table_task("table-02", "How do I fix short shots on a PP housing?", "Short Shot",
               "Retrieve the process parameter adjustments for the short shot defect", 8),
    table_task("table-03", "What parameter changes reduce sink marks on thick ribs?", "Sink Mark",
               "Retrieve the process parameter adjustments for the sink mark defect", 8),
    table_task("table-04", "Weld lines are visible near the boss. What should I adjust?", "Weld Line",
               "Retrieve the process parameter adjustments for the weld line defect", 7),
    table_task("table-05", "The molded cover shows warpage after ejection. Which settings should change first?",
               "Warpage", "Retrieve the process parameter adjustments for the warpage defect", 8),
    manual_task("manual-01", "What is the recommended mold temperature range for ABS?",
                "Find the recommended mold temperature range for ABS in the machine manual",
                "The recommended mold temperature range for ABS is 40~60 C.", 21, 9),
    manual_task("manual-02", "How often should the hydraulic oil filter be replaced?",
                "Find the hydraulic oil filter replacement interval in the machine manual",
                "Replace the hydraulic oil filter every 2000 operating hours; change the oil every 8000 hours.", 47, 8),
    manual_task("manual-03", "What should I check during the daily inspection of the machine?",
                "Find the daily inspection checklist in the machine manual",
                "Check the hydraulic oil level and temperature, inspect hoses for leaks, confirm the emergency stop, "
                "clean the mold parting surface and verify cooling water flow.", 45, 8),
    manual_task("manual-04", "How do I purge the barrel when changing color?",
                "Find the purging procedure for a color change in the machine manual",
                "Purge with the new resin or a purging compound at the higher of the two processing temperatures, "
                "with the nozzle retracted from the sprue bushing.", 58, 7),
    manual_task("manual-05", "What does the heater disconnection alarm mean and how do I fix it?",
                "Find the heater disconnection alarm procedure in the machine manual",
                "A barrel zone cannot reach its set point. Check the heater band resistance and the thermocouple "
                "connection, and replace damaged heater bands with the same wattage.", 71, 8),
    diffusion_task("diffusion-01", "Recommend process conditions. Machine temperature 20.5 C, machine humidity "
                   "42.0 %, factory temperature 24.0 C, factory humidity 36.0 %.",
                   f"Generate process conditions for {ENV_D1}", env_json(20.5, 42.0, 24.0, 36.0), 8),
    diffusion_task("diffusion-02", "Generate injection settings for machine temperature 22 C, machine humidity 45 %, "
                   "factory temperature 25 C and factory humidity 40 %.",
                   "Generate process conditions for machine temperature 22 C, machine humidity 45 %, factory "
                   "temperature 25 C, factory humidity 40 %", env_json(22, 45, 25, 40), 7),
    diffusion_task("diffusion-03", "Suggest process parameters: the machine is at 19.5 C and 50 % humidity and the "
                   "factory is at 21 C.",
                   "Generate process conditions for machine temperature 19.5 C, machine humidity 50 %, factory "
                   "temperature 21 C", env_json(19.5, 50, 21, None), 6, missing="factory humidity"),
    diffusion_task("diffusion-04", "What process parameters should I use when the machine is 23 C with 38 % "
                   "humidity and the factory is 26 C with 33 % humidity?",
                   "Generate process conditions for machine temperature 23 C, machine humidity 38 %, factory "
                   "temperature 26 C, factory humidity 33 %", env_json(23, 38, 26, 33), 7),
    diffusion_task("diffusion-05", "Give me process conditions for machine temperature 18 C, machine humidity 55 %, "
                   "factory temperature 20 C, factory humidity 50 %.",
                   "Generate process conditions for machine temperature 18 C, machine humidity 55 %, factory "
                   "temperature 20 C, factory humidity 50 %", env_json(18, 55, 20, 50), 7),
    general_task("general-01", "Which Japanese companies manufacture injection molding machines?",
                 JAPAN_ANSWER, 9, JAPAN_MAKERS),
    general_task("general-02", "What is the difference between thermoplastics and thermosets?",
                 "Thermoplastics soften when heated and harden when cooled, so they can be remelted and molded "
                 "again. Thermosets cure through an irreversible chemical reaction and cannot be remelted.", 9),
    general_task("general-03", "Explain what a normal distribution is in simple terms.",
                 "A normal distribution is a bell-shaped curve: most values sit near the average and values "
                 "become rarer the further they are from it, equally on both sides.", 8),
    general_task("general-04", "What are the latest trends in all-electric injection molding machines?",
                 ELECTRIC_ANSWER, 7, ELECTRIC_TRENDS),
    general_task("general-05", "Why do plastic pellets need to be stored in a dry place?",
                 "Many resins absorb moisture from the air. Wet pellets release steam during molding, which "
                 "causes silver streaks, bubbles and weaker parts, so pellets are kept dry or dried before use.", 8),
]


def hybrid(tid, category, query, first, second, tool2, judge, second_result=None):
    t = {"id": tid, "category": category, "query": query, "tools": ["diffusion_model", tool2],
         "plan": [["diffusion_model", first[0]], [tool2, second]],
         "formatter": {"match": first[0], "json": first[1]}, "judge": judge}
    if second_result:
        t.update(second_result)
    return t


HYBRID = [
    hybrid("hybrid-table-01", "diffusion+table",
           "Machine temperature 21 C, machine humidity 40 %, factory temperature 24 C, factory humidity 35 %. "
           "Recommend process conditions and tell me how to adjust them if burr appears.",
           ("Generate process conditions for machine temperature 21 C, machine humidity 40 %, factory temperature "
            "24 C, factory humidity 35 %", env_json(21, 40, 24, 35)),
           "Retrieve the process parameter adjustments for the burr defect", "table_retriever", 8,
           {"defect": "Burr"}),
    hybrid("hybrid-table-02", "diffusion+table",
           "Recommend settings for machine temperature 22 C, machine humidity 44 %, factory temperature 25 C and "
           "factory humidity 38 %, and say what to change if short shots occur.",
           ("Generate process conditions for machine temperature 22 C, machine humidity 44 %, factory temperature "
            "25 C, factory humidity 38 %", env_json(22, 44, 25, 38)),
           "Retrieve the process parameter adjustments for the short shot defect", "table_retriever", 7,
           {"defect": "Short Shot"}),
    hybrid("hybrid-table-03", "diffusion+table",
           "With machine temperature 20 C, machine humidity 48 %, factory temperature 23 C and factory humidity "
           "42 %, what conditions should I run, and how do I handle sink marks?",
           ("Generate process conditions for machine temperature 20 C, machine humidity 48 %, factory temperature "
            "23 C, factory humidity 42 %", env_json(20, 48, 23, 42)),
           "Retrieve the process parameter adjustments for the sink mark defect", "table_retriever", 7,
           {"defect": "Sink Mark"}),
    hybrid("hybrid-manual-01", "diffusion+manual",
           "I am molding ABS. Machine temperature 21 C, machine humidity 40 %, factory temperature 24 C, factory "
           "humidity 35 %. Recommend process conditions and tell me the mold temperature range for ABS.",
           ("Generate process conditions for machine temperature 21 C, machine humidity 40 %, factory temperature "
            "24 C, factory humidity 35 %", env_json(21, 40, 24, 35)),
           "Find the recommended mold temperature range for ABS in the machine manual", "manual_retriever", 8,
           {"manual_answer": ("The recommended mold temperature range for ABS is 40~60 C.", 21)}),
    hybrid("hybrid-manual-02", "diffusion+manual",
           "We switch to PC tomorrow. Machine temperature 22 C, machine humidity 46 %, factory temperature 25 C, "
           "factory humidity 39 %. Recommend conditions and tell me how to dry PC.",
           ("Generate process conditions for machine temperature 22 C, machine humidity 46 %, factory temperature "
            "25 C, factory humidity 39 %", env_json(22, 46, 25, 39)),
           "Find the drying conditions for PC in the machine manual", "manual_retriever", 7,
           {"manual_answer": ("Dry PC at 120 C for 3 to 4 hours; moisture content must be below 0.02 percent.", 23)}),
    hybrid("hybrid-manual-03", "diffusion+manual",
           "Machine temperature 19 C, machine humidity 52 %, factory temperature 22 C, factory humidity 47 %. "
           "Recommend process conditions and tell me the allowed hydraulic oil temperature.",
           ("Generate process conditions for machine temperature 19 C, machine humidity 52 %, factory temperature "
            "22 C, factory humidity 47 %", env_json(19, 52, 22, 47)),
           "Find the allowed hydraulic oil temperature range in the machine manual", "manual_retriever", 6,
           {"manual_answer": ("Keep hydraulic oil temperature between 30 and 50 C.", 47)}),
    hybrid("hybrid-search-01", "diffusion+search",
           "Machine temperature 21 C, machine humidity 41 %, factory temperature 24 C, factory humidity 36 %. "
           "Recommend process conditions and list Japanese makers of injection molding machines.",
           ("Generate process conditions for machine temperature 21 C, machine humidity 41 %, factory temperature "
            "24 C, factory humidity 36 %", env_json(21, 41, 24, 36)),
           JAPAN_MAKERS["action_input"], "internet_search", 8, {"search": JAPAN_MAKERS}),
    hybrid("hybrid-search-02", "diffusion+search",
           "Machine temperature 23 C, machine humidity 37 %, factory temperature 26 C, factory humidity 31 %. "
           "Recommend conditions and tell me about current trends in all-electric machines.",
           ("Generate process conditions for machine temperature 23 C, machine humidity 37 %, factory temperature "
            "26 C, factory humidity 31 %", env_json(23, 37, 26, 31)),
           ELECTRIC_TRENDS["action_input"], "internet_search", 6, {"search": ELECTRIC_TRENDS}),
    hybrid("hybrid-search-03", "diffusion+search",
           "Machine temperature 20 C, machine humidity 45 %, factory temperature 22 C, factory humidity 44 %. "
           "Recommend conditions and find recent news about bio-based resins for molding.",
           ("Generate process conditions for machine temperature 20 C, machine humidity 45 %, factory temperature "
            "22 C, factory humidity 44 %", env_json(20, 45, 22, 44)),
           "recent news bio-based resins injection molding", "internet_search", 5,
           {"search": hybrid_search("recent news bio-based resins injection molding",
                                    "Bio-based resins enter molding lines", "https://example.org/news/bio-resins",
                                    "Molders trial bio-based PP and PLA blends on standard machines.",
                                    "One result reports molders trialling bio-based PP and PLA blends on standard "
                                    "machines (https://example.org/news/bio-resins).")}),
]

# Non-English turns. Each one translates to the English text of a desk task
# (or, for the Vietnamese burr query, to its own English text).
KO_PARAMS = {"Hold Pressure": "보압", "Injection Pressure 3": "사출 압력 3", "Injection Pressure 2": "사출 압력 2",
             "Mold Temperature": "금형 온도", "Injection Speed 3": "사출 속도 3", "Injection Speed 2": "사출 속도 2",
             "Injection Speed 1": "사출 속도 1", "Barrel Temperature": "실린더 온도"}
TH_PARAMS = {"Hold Pressure": "แรงดันย้ำ", "Injection Pressure 3": "แรงดันฉีด 3", "Injection Pressure 2": "แรงดันฉีด 2",
             "Mold Temperature": "อุณหภูมิแม่พิมพ์", "Injection Speed 3": "ความเร็วฉีด 3",
             "Injection Speed 2": "ความเร็วฉีด 2", "Injection Speed 1": "ความเร็วฉีด 1",
             "Barrel Temperature": "อุณหภูมิกระบอกฉีด"}
VI_PARAMS = {"Hold Pressure": "Áp suất giữ", "Injection Pressure 3": "Áp suất phun 3",
             "Injection Pressure 2": "Áp suất phun 2", "Mold Temperature": "Nhiệt độ khuôn",
             "Injection Speed 3": "Tốc độ phun 3", "Injection Speed 2": "Tốc độ phun 2",
             "Injection Speed 1": "Tốc độ phun 1", "Barrel Temperature": "Nhiệt độ xi lanh"}
KO_DIFF = {"Injection Speed 1": "사출 속도 1", "Injection Speed 2": "사출 속도 2", "Injection Speed 3": "사출 속도 3",
           "Injection Pressure 1": "사출 압력 1", "Injection Pressure 2": "사출 압력 2",
           "Injection Pressure 3": "사출 압력 3", "Injection Position 1": "사출 위치 1",
           "Injection Position 2": "사출 위치 2", "Injection Position 3": "사출 위치 3", "Hold Time": "보압 시간"}
TH_DIFF = {"Injection Speed 1": "ความเร็วฉีด 1", "Injection Speed 2": "ความเร็วฉีด 2",
           "Injection Speed 3": "ความเร็วฉีด 3", "Injection Pressure 1": "แรงดันฉีด 1",
           "Injection Pressure 2": "แรงดันฉีด 2", "Injection Pressure 3": "แรงดันฉีด 3",
           "Injection Position 1": "ตำแหน่งฉีด 1", "Injection Position 2": "ตำแหน่งฉีด 2",
           "Injection Position 3": "ตำแหน่งฉีด 3", "Hold Time": "เวลาย้ำ"}
VI_DIFF = {"Injection Speed 1": "Tốc độ phun 1", "Injection Speed 2": "Tốc độ phun 2",
           "Injection Speed 3": "Tốc độ phun 3", "Injection Pressure 1": "Áp suất phun 1",
           "Injection Pressure 2": "Áp suất phun 2", "Injection Pressure 3": "Áp suất phun 3",
           "Injection Position 1": "Vị trí phun 1", "Injection Position 2": "Vị trí phun 2",
           "Injection Position 3": "Vị trí phun 3", "Hold Time": "Thời gian giữ áp"}

VI_BURR_EN = ("The product has bavaria at the parting line. Which process parameters should be adjusted and in "
              "what order?")

MULTI = [
    # Korean
    {"id": "ko-table", "language": "Korean", "kind": "table", "english": "table-01",
     "query": "성형품의 파팅 라인에 버(burr)가 생깁니다. 어떤 공정 조건을 어떤 순서로 조정해야 하나요?",
     "report": "버(burr)를 없애려면 아래 순서대로 조정하십시오 (우선순위가 작은 것부터):\n" +
               numbered_adjustments("Burr", {"Increase": "증가", "Decrease": "감소"}, KO_PARAMS) +
               "\n한 번에 하나의 조건만 바꾸고 다음 샷을 확인하십시오."},
    {"id": "ko-manual", "language": "Korean", "kind": "manual", "english": "manual-01",
     "query": "ABS의 권장 금형 온도 범위는 얼마입니까?",
     "report": "ABS의 권장 금형 온도(mold temperature) 범위는 40~60 C입니다. 자세한 내용은 기계 매뉴얼 21쪽을 참고하십시오."},
    {"id": "ko-diffusion", "language": "Korean", "kind": "diffusion", "english": "diffusion-01",
     "query": "공정 조건을 추천해 주세요. 기계 온도 20.5 C, 기계 습도 42.0 %, 공장 온도 24.0 C, 공장 습도 36.0 %.",
     "report": diffusion_block("추천 공정 조건 (64개 후보 중 최적, 양품 예측 확률 {{11}}):", KO_DIFF) +
               "\n첫 샷을 확인하면서 미세 조정하십시오."},
    {"id": "ko-search", "language": "Korean", "kind": "search", "english": "general-01",
     "query": "사출 성형기를 만드는 일본 회사는 어디인가요?",
     "report": "일본의 주요 사출 성형기 제조사는 스미토모 (Sumitomo (SHI) Demag), 닛세이 (Nissei), "
               "시바우라 기계 (Shibaura Machine, 옛 Toshiba Machine), 화낙 (FANUC), JSW (The Japan Steel Works)입니다. "
               "출처: 각 회사의 example.org/makers 페이지."},
    # Thai
    {"id": "th-table", "language": "Thai", "kind": "table", "english": "table-01",
     "query": "ชิ้นงานมีครีบ (burr) ตามแนวแยกแม่พิมพ์ ควรปรับพารามิเตอร์ใดและเรียงลำดับอย่างไร",
     "report": "เพื่อแก้ครีบ (burr) ให้ปรับตามลำดับนี้ (เริ่มจากลำดับความสำคัญน้อยที่สุด):\n" +
               numbered_adjustments("Burr", {"Increase": "เพิ่ม", "Decrease": "ลด"}, TH_PARAMS) +
               "\nปรับทีละค่าและตรวจสอบชิ้นงานช็อตถัดไปก่อนปรับค่าต่อไป"},
    {"id": "th-manual", "language": "Thai", "kind": "manual", "english": "manual-01",
     "query": "ช่วงอุณหภูมิแม่พิมพ์ที่แนะนำสำหรับ ABS คือเท่าไร",
     "report": "ช่วงอุณหภูมิแม่พิมพ์ (mold temperature) ที่แนะนำสำหรับ ABS คือ 40~60 C ดูรายละเอียดในคู่มือเครื่องหน้า 21"},
    {"id": "th-diffusion", "language": "Thai", "kind": "diffusion", "english": "diffusion-01",
     "query": "ช่วยแนะนำเงื่อนไขการฉีด อุณหภูมิเครื่อง 20.5 C ความชื้นเครื่อง 42.0 % อุณหภูมิโรงงาน 24.0 C "
              "ความชื้นโรงงาน 36.0 %",
     "report": diffusion_block("เงื่อนไขการฉีดที่แนะนำ (ดีที่สุดจาก 64 ตัวเลือก ความน่าจะเป็นชิ้นงานดี {{11}}):",
                               TH_DIFF) + "\nเริ่มจากค่าเหล่านี้แล้วปรับละเอียดระหว่างดูช็อตแรก"},
    {"id": "th-search", "language": "Thai", "kind": "search", "english": "general-01",
     "query": "บริษัทญี่ปุ่นใดบ้างที่ผลิตเครื่องฉีดพลาสติก",
     "report": "ผู้ผลิตเครื่องฉีดพลาสติกรายใหญ่ของญี่ปุ่น ได้แก่ Sumitomo (SHI) Demag, Nissei, Shibaura Machine "
               "(เดิมชื่อ Toshiba Machine), FANUC และ JSW (The Japan Steel Works) แหล่งข้อมูล: หน้า example.org/makers "
               "ของแต่ละบริษัท"},
    # Vietnamese
    {"id": "vi-table", "language": "Vietnamese", "kind": "table", "english": None, "english_text": VI_BURR_EN,
     "query": "Sản phẩm bị bavaria ở đường phân khuôn. Cần điều chỉnh những thông số nào và theo thứ tự nào?",
     "plan_task": "Retrieve the process parameter adjustments for the bavaria defect",
     "report": "Để khắc phục bavia (burr, bavaria), hãy điều chỉnh theo thứ tự sau (ưu tiên nhỏ trước):\n" +
               numbered_adjustments("Burr", {"Increase": "tăng", "Decrease": "giảm"}, VI_PARAMS) +
               "\nMỗi lần chỉ thay đổi một thông số và kiểm tra lần ép tiếp theo."},
    {"id": "vi-manual", "language": "Vietnamese", "kind": "manual", "english": "manual-01",
     "query": "Khoảng nhiệt độ khuôn khuyến nghị cho ABS là bao nhiêu?",
     "report": "Khoảng nhiệt độ khuôn (mold temperature) khuyến nghị cho ABS là 40~60 C. Xem trang 21 của sổ tay "
               "máy để biết chi tiết."},
    {"id": "vi-diffusion", "language": "Vietnamese", "kind": "diffusion", "english": "diffusion-01",
     "query": "Hãy đề xuất điều kiện ép. Nhiệt độ máy 20.5 C, độ ẩm máy 42.0 %, nhiệt độ nhà máy 24.0 C, độ ẩm nhà "
              "máy 36.0 %.",
     "report": diffusion_block("Điều kiện ép đề xuất (tốt nhất trong 64 ứng viên, xác suất đạt {{11}}):", VI_DIFF) +
               "\nBắt đầu từ các giá trị này và tinh chỉnh khi theo dõi những lần ép đầu."},
    {"id": "vi-search", "language": "Vietnamese", "kind": "search", "english": "general-01",
     "query": "Những công ty Nhật Bản nào sản xuất máy ép nhựa?",
     "report": "Các nhà sản xuất máy ép nhựa lớn của Nhật Bản gồm Sumitomo (SHI) Demag, Nissei, Shibaura Machine "
               "(trước đây là Toshiba Machine), FANUC và JSW (The Japan Steel Works). Nguồn: các trang "
               "example.org/makers của từng công ty."},
]


# ---------------------------------------------------------------------------
# Rule emission
# ---------------------------------------------------------------------------

def rule(stage, patterns, response):
    return {"stage": stage, "pattern": patterns, "response": response}


def plan_json(steps):
    return json.dumps({"steps": steps}, ensure_ascii=False)


def end_line(s):
    """Matches `s` as the final line of the prompt (retriever and tool subtasks)."""
    return lit(s) + r"\s*$"


class Corpus:
    def __init__(self):
        self.translator = []
        self.classifier = []
        self.planner = []
        self.supervisor = []
        self.replanner = []
        self.tools = []
        self.react = []
        self.reporter = []
        self.judge = []
        self.search_entries = []
        self._seen_tools = set()
        self._seen_search = set()

    def tool_rule(self, key, r):
        if key not in self._seen_tools:
            self._seen_tools.add(key)
            self.tools.append(r)

    def add_search(self, s):
        if s["action_input"] in self._seen_search:
            return
        self._seen_search.add(s["action_input"])
        self.search_entries.append({"pattern": "^" + lit(s["action_input"]) + "$", "results": s["results"]})
        self.tools.append(rule("search_summary", [r"Task:\n" + lit(s["action_input"]) + r"\n"], s["summary"]))

    def injection(self, english, steps):
        q = r"Query:\n" + lit(english) + r"\s*$"
        self.classifier.append(rule("classifier", [q], '{"category": "injection"}'))
        self.planner.append(rule("planner", [r"Question: " + lit(english) + r"\n"], plan_json(steps)))

    def table_tool(self, task, defect):
        self.tool_rule(("table", task), rule("table_retriever", [end_line(task)], adjustment_listing(defect)))

    def manual_tool(self, task, answer):
        self.tool_rule(("manual", task), rule("manual_retriever", [end_line(task)], answer))

    def formatter_tool(self, task, js):
        self.tool_rule(("fmt", task), rule("diffusion_formatter", [r"Request:\n" + lit(task) + r"\s*$"], js))

    def general(self, english, answer, search):
        q = r"Query:\n" + lit(english) + r"\s*$"
        self.classifier.append(rule("classifier", [q], '{"category": "no_injection"}'))
        head = r"Question:\n" + lit(english) + r"\n"
        if search:
            self.add_search(search)
            self.react.append(rule("react", [head, r"Observation:"],
                                   "Thought: The search results name the companies I need.\nFinal Answer: " + answer))
            self.react.append(rule("react", [head],
                                   "Thought: This needs current outside information.\nAction: internet_search\n"
                                   "Action Input: " + search["action_input"]))
        else:
            self.react.append(rule("react", [head], "Thought: I can answer this directly.\nFinal Answer: " + answer))

    def report(self, english, language, text, patterns=()):
        self.reporter.append(rule("reporter", [r"The operator reads " + lit(language) + r"\.",
                                               r"Question \(English\):\n" + lit(english) + r"\n", *patterns], text))

    def judge_rule(self, query, rating, category):
        self.judge.append(rule("judge", [r"Question:\n" + lit(query) + r"\n"],
                               f"Relevance: The answer addresses the {category} question that was asked.\n"
                               f"Accuracy: The content matches the reference material.\nRating: {rating}"))


def build():
    c = Corpus()
    by_id = {t["id"]: t for t in DESK}

    for t in DESK:
        q = t["query"]
        if t["category"] == "general":
            c.general(q, t["answer"], t.get("search"))
        else:
            c.injection(q, t["plan"])
            task = t["plan"][0][1]
            if t["category"] == "table":
                defect = next(d for d in TABLE if d.lower() in task or any(a.lower() in task for a in TABLE[d]["aliases"]))
                c.table_tool(task, defect)
            elif t["category"] == "manual":
                c.manual_tool(task, t["manual"]["answer"])
            else:
                c.formatter_tool(task, t["formatter"]["json"])
            c.report(q, "English", t["report"]["English"], t.get("report_patterns", []))
        c.judge_rule(q, t["judge"], t["category"])

    for t in HYBRID:
        q = t["query"]
        c.injection(q, t["plan"])
        c.formatter_tool(t["formatter"]["match"], t["formatter"]["json"])
        tool2, task2 = t["plan"][1]
        head = r"Question: " + lit(q) + r"\n"
        c.supervisor.append(rule("supervisor", [head, r"\n\n2\. \("], '{"decision": "respond"}'))
        c.supervisor.append(rule("supervisor", [head], '{"decision": "replan"}'))
        c.replanner.append(rule("replanner", [head], plan_json([t["plan"][1]])))
        lines = [diffusion_block("Recommended process conditions (best of 64 candidates, predicted good probability "
                                 "{{11}}):")]
        if tool2 == "table_retriever":
            c.table_tool(task2, t["defect"])
            lines.append(f"If {t['defect'].lower()} appears, adjust in this order:\n" +
                         numbered_adjustments(t["defect"]))
        elif tool2 == "manual_retriever":
            answer, page = t["manual_answer"]
            c.manual_tool(task2, f"Answer: {answer}\nReference: See page {page} for detail.")
            lines.append(f"From the machine manual: {answer} (page {page}).")
        else:
            c.add_search(t["search"])
            lines.append("From the web: " + t["search"]["summary"])
        c.report(q, "English", "\n\n".join(lines), PARAM_PATTERNS)
        c.judge_rule(q, t["judge"], t["category"])

    for m in MULTI:
        english = by_id[m["english"]]["query"] if m["english"] else m["english_text"]
        c.translator.append(rule("translator", [r"Text:\n" + lit(m["query"]) + r"\s*$"],
                                 json.dumps({"translated_query": english, "language": m["language"]},
                                            ensure_ascii=False)))
        if m["english"] is None:
            steps = [["table_retriever", m["plan_task"]]]
            c.injection(english, steps)
            c.table_tool(m["plan_task"], "Burr")
        patterns = PARAM_PATTERNS if m["kind"] == "diffusion" else []
        c.report(english, m["language"], m["report"], patterns)

    # Catch-all rules come last.
    formatter = rule("task_formatter", [r"Latest message:\n([\s\S]+?)\s*$"],
                     "- User's Current Request:\n{{1}}\n\n- Relevant Information from Conversation History:\n- (none)")
    english = rule("translator", [], '{"translated_query": "(unchanged)", "language": "English"}')
    supervisor = rule("supervisor", [], '{"decision": "respond"}')
    judge = rule("judge", [], "Relevance: The answer is on topic.\nAccuracy: Not verified.\nRating: 5")

    rules = ([formatter] + c.translator + [english] + c.classifier + c.planner + c.supervisor + [supervisor] +
             c.replanner + c.tools + c.react + c.reporter + c.judge + [judge])
    return c, rules


def suite(tasks):
    return {"tasks": [{"id": t["id"], "category": t["category"], "query": t["query"],
                       "expected_tools": t["tools"]} for t in tasks]}


def write(path, doc):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def main():
    c, rules = build()
    write(DATA / "fixtures" / "desk.json", {"rules": rules})
    write(DATA / "fixtures" / "search.json", {"entries": c.search_entries})
    write(DATA / "suites" / "desk.suite.json", suite(DESK))
    write(DATA / "suites" / "hybrid.suite.json", suite(HYBRID))
    write(DATA / "suites" / "multilingual.json",
          {"turns": [{"id": m["id"], "language": m["language"], "kind": m["kind"], "query": m["query"]}
                     for m in MULTI]})
    # Example operator ratings for the desk suite, used to exercise the
    # judge-versus-human correlation.
    human = {t["id"]: float(min(10, max(0, t["judge"] + (1 if i % 3 == 0 else -1 if i % 3 == 1 else 0))))
             for i, t in enumerate(DESK)}
    write(DATA / "suites" / "desk.human.json", human)
    print(f"{len(rules)} fixture rules, {len(c.search_entries)} search entries")


if __name__ == "__main__":
    main()
