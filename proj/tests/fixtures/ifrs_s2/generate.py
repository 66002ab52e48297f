#!/usr/bin/env python3
"""Writes the synthetic IFRS S2 intake, the scripted model responses that
record-fixtures turns into replay.jsonl, and the review decisions.

Every fact is one sentence of the report and one extracted triple. Facts
marked R are the ones the scripted review deletes.
"""
import json
import pathlib

HERE = pathlib.Path(__file__).resolve().parent

# (page, subject, predicate, object, sentence, review)   review: K keep, R reject
FACTS = [
    # page 1: governance and strategy
    (1, "Northwind Energy", "reports under", "IFRS S2", "Northwind Energy reports under IFRS S2 for the financial year ended 31 December 2024.", "K"),
    (1, "Board of Directors", "oversees", "climate-related risks", "The Board of Directors oversees climate-related risks and opportunities as part of its annual strategy review.", "K"),
    (1, "Sustainability Committee", "reports to", "Board of Directors", "The Sustainability Committee reports to the Board of Directors at every quarterly meeting.", "K"),
    (1, "Sustainability Committee", "meets", "quarterly", "The Sustainability Committee meets quarterly and reviews progress against the transition plan.", "R"),
    (1, "Chief Sustainability Officer", "chairs", "Climate Working Group", "The Chief Sustainability Officer chairs the Climate Working Group, which coordinates data collection.", "K"),
    (1, "Climate Working Group", "includes", "finance and operations leads", "The Climate Working Group includes finance and operations leads from each business unit.", "R"),
    (1, "Audit Committee", "reviews", "climate disclosures", "The Audit Committee reviews climate disclosures before they are published.", "K"),
    (1, "executive remuneration", "is linked to", "emissions reduction targets", "Twenty percent of executive remuneration is linked to emissions reduction targets.", "K"),
    (1, "Board of Directors", "approved", "transition plan", "In March 2024 the Board of Directors approved the transition plan.", "K"),
    (1, "the company", "considers", "climate", "The company considers climate in many of its activities.", "R"),
    (1, "directors", "received", "climate training", "All directors received climate training delivered by an external adviser in 2024.", "K"),
    (1, "it", "is", "important", "It is important to note the uncertainty of long-range estimates.", "R"),
    (1, "management", "monitors", "things", "Management monitors things that may matter over time.", "R"),
    (1, "Northwind Energy", "operates", "wind farms", "Northwind Energy operates wind farms in Scotland and Norway.", "K"),
    (1, "Northwind Energy", "operates", "gas-fired power plants", "Northwind Energy also operates two gas-fired power plants in the Netherlands.", "K"),
    (1, "gas-fired power plants", "are exposed to", "carbon pricing", "The gas-fired power plants are exposed to carbon pricing under the EU Emissions Trading System.", "K"),
    (1, "carbon pricing", "could reduce", "operating margin", "Carbon pricing could reduce operating margin by up to 4 percent by 2030.", "K"),
    (1, "wind farms", "benefit from", "renewable energy demand", "The wind farms benefit from renewable energy demand driven by corporate power purchase agreements.", "K"),
    (1, "the company", "has", "risks", "The company has risks.", "R"),
    (1, "transition plan", "targets", "coal exit by 2026", "The transition plan targets a complete coal exit by 2026.", "K"),
    (1, "transition plan", "allocates", "EUR 1.2 billion", "The transition plan allocates EUR 1.2 billion of capital expenditure to offshore wind.", "K"),
    (1, "offshore wind", "is", "growth area", "Offshore wind is the main growth area identified in the strategy.", "R"),
    (1, "this", "affects", "strategy", "This affects strategy in several ways.", "R"),
    (1, "climate scenarios", "inform", "capital allocation", "Climate scenarios inform capital allocation decisions for new generation assets.", "K"),
    # page 2: scenario analysis and risk management
    (2, "scenario analysis", "uses", "IEA Net Zero 2050 scenario", "Scenario analysis uses the IEA Net Zero 2050 scenario as the orderly transition case.", "K"),
    (2, "scenario analysis", "uses", "NGFS Current Policies scenario", "Scenario analysis also uses the NGFS Current Policies scenario as the hot-house world case.", "K"),
    (2, "Current Policies scenario", "implies", "3 degrees warming", "The Current Policies scenario implies about 3 degrees of warming by 2100.", "K"),
    (2, "coastal substations", "face", "flood risk", "Coastal substations face flood risk that rises materially under the hot-house world case.", "K"),
    (2, "flood risk", "could cause", "asset impairment", "Flood risk could cause asset impairment of EUR 45 million by 2040.", "K"),
    (2, "heatwaves", "reduce", "thermal plant efficiency", "Heatwaves reduce thermal plant efficiency during summer peaks.", "K"),
    (2, "wind variability", "affects", "generation output", "Wind variability affects generation output and revenue stability.", "R"),
    (2, "the organization", "is", "resilient", "The organization is resilient.", "R"),
    (2, "resilience assessment", "covers", "all generation assets", "The resilience assessment covers all generation assets and the transmission interfaces.", "K"),
    (2, "Enterprise Risk Management framework", "integrates", "climate-related risks", "The Enterprise Risk Management framework integrates climate-related risks alongside financial and operational risks.", "K"),
    (2, "risk register", "scores", "climate-related risks", "The risk register scores climate-related risks on likelihood and impact every six months.", "K"),
    (2, "risk owners", "are assigned to", "each climate risk", "Risk owners are assigned to each climate risk in the register.", "R"),
    (2, "physical risks", "are assessed using", "asset-level hazard maps", "Physical risks are assessed using asset-level hazard maps from a third-party provider.", "K"),
    (2, "transition risks", "are assessed using", "carbon price sensitivities", "Transition risks are assessed using carbon price sensitivities of EUR 100 and EUR 150 per tonne.", "K"),
    (2, "it", "has", "processes", "It has processes.", "R"),
    (2, "Internal Audit", "tested", "risk identification process", "Internal Audit tested the risk identification process in the third quarter.", "K"),
    (2, "supply chain", "is exposed to", "turbine component shortages", "The supply chain is exposed to turbine component shortages caused by extreme weather at supplier sites.", "K"),
    (2, "Northwind Energy", "prioritizes", "risks", "Northwind Energy prioritizes risks.", "R"),
    (2, "insurance programme", "covers", "storm damage", "The insurance programme covers storm damage to offshore assets.", "K"),
    (2, "the company", "uses", "tools", "The company uses tools.", "R"),
    (2, "climate opportunities", "include", "green hydrogen", "Climate opportunities include green hydrogen production using surplus wind power.", "K"),
    (2, "green hydrogen", "could generate", "EUR 80 million revenue", "Green hydrogen could generate EUR 80 million revenue per year by 2032.", "K"),
    (2, "this", "means", "change", "This means change.", "R"),
    (2, "battery storage", "reduces", "curtailment", "Battery storage reduces curtailment at the Scottish wind farms.", "R"),
    (2, "Northwind Energy", "has", "a plan", "Northwind Energy has a plan.", "R"),
    # page 3: metrics and targets
    (3, "Scope 1 emissions", "were", "2.1 million tCO2e", "Scope 1 emissions were 2.1 million tCO2e in 2024.", "K"),
    (3, "Scope 2 emissions", "were", "48,000 tCO2e", "Scope 2 emissions were 48,000 tCO2e on a market-based basis.", "K"),
    (3, "Scope 3 emissions", "were", "3.4 million tCO2e", "Scope 3 emissions were 3.4 million tCO2e, mostly from sold gas.", "K"),
    (3, "emissions inventory", "follows", "GHG Protocol", "The emissions inventory follows the GHG Protocol Corporate Standard.", "K"),
    (3, "Scope 1 and 2 emissions", "are assured by", "external auditor", "Scope 1 and 2 emissions are assured by the external auditor at limited assurance level.", "K"),
    (3, "Northwind Energy", "targets", "net zero by 2045", "Northwind Energy targets net zero by 2045 across scopes 1, 2 and 3.", "K"),
    (3, "interim target", "requires", "60 percent reduction by 2030", "The interim target requires a 60 percent reduction in scope 1 and 2 emissions by 2030 against 2019.", "K"),
    (3, "emissions targets", "are validated by", "Science Based Targets initiative", "The emissions targets are validated by the Science Based Targets initiative.", "K"),
    (3, "carbon intensity", "fell to", "210 gCO2e per kWh", "Carbon intensity fell to 210 gCO2e per kWh in 2024.", "K"),
    (3, "renewable capacity", "reached", "3.2 GW", "Renewable capacity reached 3.2 GW at year end.", "K"),
    (3, "renewable share", "was", "58 percent", "The renewable share of generation was 58 percent.", "K"),
    (3, "internal carbon price", "is set at", "EUR 90 per tonne", "The internal carbon price is set at EUR 90 per tonne for investment appraisal.", "K"),
    (3, "capital expenditure", "aligned with", "EU Taxonomy", "Seventy percent of capital expenditure is aligned with the EU Taxonomy.", "K"),
    (3, "the company", "tracks", "metrics", "The company tracks metrics.", "R"),
    (3, "assets exposed to physical risk", "represent", "12 percent of asset value", "Assets exposed to physical risk represent 12 percent of asset value.", "K"),
    (3, "methane leakage", "was", "0.2 percent", "Methane leakage from gas operations was 0.2 percent of throughput.", "K"),
    (3, "it", "improved", "performance", "It improved performance.", "R"),
    (3, "water withdrawal", "declined by", "15 percent", "Water withdrawal at thermal plants declined by 15 percent.", "K"),
    (3, "the organization", "reports", "data", "The organization reports data.", "R"),
    (3, "progress", "is", "good", "Progress is good.", "R"),
    (3, "climate-related metrics", "are reported in", "annual report", "Climate-related metrics are reported in the annual report and the sustainability data book.", "K"),
    (3, "targets", "are", "ambitious", "Targets are ambitious.", "R"),
    (3, "Northwind Energy", "is committed to", "sustainability", "Northwind Energy is committed to sustainability.", "R"),
    (3, "Northwind Energy", "does", "reporting", "Northwind Energy does reporting.", "R"),
]

# Context prose with no extractable facts; it sizes the report to three chunks.
FILLER = {
    1: ("Governance and strategy. This report sets out how climate matters are governed across the group and how "
        "they shape the long-term plan. It is prepared for investors, lenders and other readers who rely on general "
        "purpose financial reports and who need to understand how climate conditions could affect prospects. The "
        "disclosures below follow the structure of the reporting framework, moving from oversight arrangements to "
        "the strategic response. Where figures are estimates, the basis of preparation explains the judgments made "
        "and the sources relied upon. Comparative information is provided where it was available and reliable. "
        "Readers should consider the forward-looking statements in this section together with the cautionary notes "
        "at the end of the report. The reporting period matches the period of the consolidated financial statements, "
        "and the reporting entity is the same consolidated group. "),
    2: ("Scenario analysis and risk management. The group assesses how resilient its strategy and business model are "
        "to a range of plausible climate futures. The analysis is qualitative for some risk categories and "
        "quantitative for others, depending on the availability of data and the materiality of the exposure. "
        "Assumptions about policy, technology and market developments are reviewed each year by the working group "
        "and challenged by an independent adviser. The time horizons used are short term to 2027, medium term to "
        "2035 and long term to 2050, chosen to match asset lives and the planning cycle. The processes described "
        "below are the same processes the group uses for other principal risks, so that climate matters are not "
        "managed in isolation from the rest of the business. "),
    3: ("Metrics and targets. This section reports the figures used to track performance against commitments. "
        "Greenhouse gas emissions are measured in tonnes of carbon dioxide equivalent using the global warming "
        "potentials from the latest assessment report. The organisational boundary follows the operational control "
        "approach. Restatements of prior-year figures are made when a methodology change or an error has an effect "
        "above five percent, and the reasons are explained alongside the data. Targets are expressed against a 2019 "
        "base year, which is the first year for which complete and assured data exist for all sites. Progress is "
        "reviewed by the Sustainability Committee and published once a year together with the financial results. "),
}

CLOSING = {
    1: (" The strategy discussion above reflects the information reasonably available at the reporting date without "
        "undue cost or effort. Management expects to refine the financial effects as internal data systems mature and "
        "as market practice develops. The group will continue to engage with regulators, customers and communities on "
        "the pace of the energy transition, and it will update the plan when material changes occur. Any change to "
        "the plan will be explained in the next report together with the reasons for it and the expected effect on "
        "the financial position, financial performance and cash flows."),
    2: (" The results of the analysis are uncertain because they depend on assumptions about future policy and "
        "technology that may not hold. The figures should therefore be read as indications of direction and scale "
        "rather than as forecasts. The group intends to extend quantitative coverage to the remaining risk "
        "categories over the next two reporting periods and to publish the methodology in more detail. Feedback from "
        "investors on earlier reports has been taken into account in the presentation of this section, in particular "
        "on the link between risk scores and the financial statements."),
    3: (" The data in this section were compiled from site records, meter readings, supplier invoices and "
        "engineering estimates. Where primary data were not available, industry-average emission factors were used "
        "and flagged in the data book. The group does not use carbon credits to meet its reduction targets and will "
        "disclose any future use separately. Metrics that rely on estimates are identified so that readers can judge "
        "the level of measurement uncertainty. The next report will include an updated baseline if acquisitions or "
        "disposals change the structure of the group significantly."),
}


def main():
    assert len(FACTS) == 73, len(FACTS)
    rejects = [f for f in FACTS if f[5] == "R"]
    assert len(rejects) == 24, len(rejects)
    keys = {(f[1], f[2], f[3]) for f in FACTS}
    assert len(keys) == 73, "facts must be distinct"

    pages = []
    for page in (1, 2, 3):
        sentences = [f[4] for f in FACTS if f[0] == page]
        pages.append({"page": page, "text": FILLER[page] + " ".join(sentences) + CLOSING[page] + "\n"})
    intake = {"title": "Northwind Energy Climate Report 2024", "source_file": "northwind_climate_2024.pdf", "pages": pages}
    (HERE / "intake.json").write_text(json.dumps(intake, indent=2, ensure_ascii=False) + "\n")

    # The chunker joins pages with one newline; chunks follow the default 4000/200 window.
    full = "\n".join(p["text"] for p in pages)
    size, overlap = 4000, 200
    starts, start = [], 0
    while start < len(full):
        starts.append(start)
        if start + size >= len(full):
            break
        start += size - overlap
    chunks = [full[s:s + size] for s in starts]
    assert len(chunks) == 3, (len(full), starts)

    outputs = []
    for text in chunks:
        lines = [f"({f[1]}, {f[2]}, {f[3]})" for f in FACTS if f[4] in text]
        outputs.append(lines)
    for f in FACTS:
        assert any(f[4] in c for c in chunks), f
    # Noise the parser must skip: a prose line and a two-field tuple.
    outputs[0].insert(0, "Here are the extracted triples:")
    outputs[2].append("(Northwind Energy, reports)")
    script = ["ifrs_s2"] + ["\n".join(lines) for lines in outputs]
    (HERE / "script.json").write_text(json.dumps(script, indent=2, ensure_ascii=False) + "\n")

    review = {
        "reject": [{"subject": f[1], "predicate": f[2], "object": f[3]} for f in rejects],
        "expected": {"inserted": 73, "rejected": 24, "certified": 49},
    }
    (HERE / "review.json").write_text(json.dumps(review, indent=2, ensure_ascii=False) + "\n")
    print(len(full), starts, [len(o) for o in outputs])


if __name__ == "__main__":
    main()
