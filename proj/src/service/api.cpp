#include "certkg/service/api.hpp"

#include "certkg/digest.hpp"
#include "certkg/fusion/fusion.hpp"
#include "certkg/governance/review.hpp"
#include "certkg/governance/roles.hpp"
#include "certkg/governance/verifier.hpp"
#include "certkg/service/export.hpp"
#include "certkg/store/traversal.hpp"
#include "certkg/tasks/analysis.hpp"
#include "certkg/tasks/tasks.hpp"
#include "certkg/text.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <functional>
#include <set>

namespace certkg::service {

using nlohmann::json;
using governance::Action;
using governance::Actor;

namespace {

std::string dump(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

ApiResponse json_response(const json& j, int status = 200) { return ApiResponse{status, dump(j), "application/json"}; }

Error bad_request(const std::string& msg) { return Error(ErrorCode::InvalidArgument, msg); }

// Request state handed to a route handler after authorization.
struct Context {
  Service& svc;
  const ApiRequest& req;
  Actor actor;
  std::map<std::string, std::string> params;
  std::optional<json> parsed;

  const json& body() {
    if (!parsed) {
      if (text::trim(req.body).empty()) {
        parsed = json::object();
      } else {
        try {
          parsed = json::parse(req.body);
        } catch (const json::parse_error& e) {
          throw bad_request(std::string("request body is not JSON: ") + e.what());
        }
        if (!parsed->is_object()) throw bad_request("request body must be a JSON object");
      }
    }
    return *parsed;
  }

  std::string str(const char* key) {
    const auto& b = body();
    auto it = b.find(key);
    if (it == b.end() || it->is_null()) throw Error(ErrorCode::EmptyField, std::string("missing field '") + key + "'");
    if (!it->is_string()) throw bad_request(std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
  }
  std::optional<std::string> opt_str(const char* key) {
    const auto& b = body();
    auto it = b.find(key);
    if (it == b.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw bad_request(std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
  }
  std::optional<long long> opt_int(const char* key) {
    const auto& b = body();
    auto it = b.find(key);
    if (it == b.end() || it->is_null()) return std::nullopt;
    if (!it->is_number_integer()) throw bad_request(std::string("field '") + key + "' must be an integer");
    return it->get<long long>();
  }
  std::optional<double> opt_number(const char* key) {
    const auto& b = body();
    auto it = b.find(key);
    if (it == b.end() || it->is_null()) return std::nullopt;
    if (!it->is_number()) throw bad_request(std::string("field '") + key + "' must be a number");
    return it->get<double>();
  }
  bool flag(const char* key, bool fallback = false) {
    const auto& b = body();
    auto it = b.find(key);
    if (it == b.end() || it->is_null()) return fallback;
    if (!it->is_boolean()) throw bad_request(std::string("field '") + key + "' must be a boolean");
    return it->get<bool>();
  }
  std::vector<std::string> strings(const char* key, bool required) {
    const auto& b = body();
    auto it = b.find(key);
    if (it == b.end() || it->is_null()) {
      if (required) throw Error(ErrorCode::EmptyField, std::string("missing field '") + key + "'");
      return {};
    }
    if (!it->is_array()) throw bad_request(std::string("field '") + key + "' must be an array of strings");
    std::vector<std::string> out;
    for (const auto& v : *it) {
      if (!v.is_string()) throw bad_request(std::string("field '") + key + "' must be an array of strings");
      out.push_back(v.get<std::string>());
    }
    return out;
  }

  std::optional<std::string> query(const std::string& key) const {
    auto it = req.query.find(key);
    if (it == req.query.end()) return std::nullopt;
    return it->second;
  }
  long long query_int(const std::string& key, long long fallback) const {
    auto v = query(key);
    if (!v || v->empty()) return fallback;
    long long out = 0;
    auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc() || ptr != v->data() + v->size()) {
      throw bad_request("query parameter '" + key + "' must be an integer");
    }
    return out;
  }
  bool query_bool(const std::string& key) const {
    auto v = query(key);
    if (!v || v->empty() || *v == "false" || *v == "0") return false;
    if (*v == "true" || *v == "1") return true;
    throw bad_request("query parameter '" + key + "' must be true or false");
  }
  std::optional<std::set<std::string>> query_list(const std::string& key) const {
    auto v = query(key);
    if (!v || text::trim(*v).empty()) return std::nullopt;
    std::set<std::string> out;
    std::size_t start = 0;
    while (start <= v->size()) {
      auto end = v->find(',', start);
      if (end == std::string::npos) end = v->size();
      auto item = text::trim(std::string_view(*v).substr(start, end - start));
      if (!item.empty()) out.insert(item);
      start = end + 1;
    }
    return out;
  }

  const std::string& param(const std::string& key) const { return params.at(key); }
};

using Handler = std::function<ApiResponse(Context&)>;

struct Route {
  std::string method;
  std::string path;
  std::optional<Action> permission;  // nullopt: public
  Handler handler;
  std::vector<std::string> segments;
};

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < path.size()) {
    auto j = path.find('/', i);
    if (j == std::string_view::npos) j = path.size();
    if (j > i) out.emplace_back(path.substr(i, j - i));
    i = j + 1;
  }
  return out;
}

bool match(const Route& r, const std::vector<std::string>& segs, std::map<std::string, std::string>& params) {
  if (r.segments.size() != segs.size()) return false;
  std::map<std::string, std::string> out;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const auto& p = r.segments[i];
    if (p.size() > 2 && p.front() == '{' && p.back() == '}') {
      out[p.substr(1, p.size() - 2)] = segs[i];
    } else if (p != segs[i]) {
      return false;
    }
  }
  params = std::move(out);
  return true;
}

int checked_hops(long long hops) {
  if (hops < 0 || hops > tasks::kMaxTaskHops) {
    throw bad_request("hops must be within [0, " + std::to_string(tasks::kMaxTaskHops) + "]");
  }
  return static_cast<int>(hops);
}

std::size_t checked_cap(long long cap) {
  if (cap < 1) throw bad_request("cap must be positive");
  return static_cast<std::size_t>(cap);
}

std::string graph_of_triple(Context& c, const std::string& tid) {
  return c.svc.store().read([&](const store::StoreState& s) { return s.graph_of_triple(tid).id; });
}

json session_json(const governance::Session& s) {
  return {{"token", s.token},
          {"expires_at", format_timestamp(s.expires_at)},
          {"actor", {{"id", s.actor.id}, {"role", governance::to_string(s.actor.role)}}}};
}

void audit(Context& c, const std::string& type, const std::string& ref, json payload) {
  c.svc.store().write([&](store::GraphStore::Writer& w) { w.audit_only(type, ref, std::move(payload), c.actor.id); });
}

json document_row(const store::StoreState& s, const store::DocumentRecord& d) {
  json row = store::document_summary(d);
  std::size_t live = 0;
  std::size_t certified = 0;
  for (const auto* t : s.document_triples(d.id)) {
    if (!t->deleted) ++live;
    if (t->status == store::TripleStatus::Certified) ++certified;
  }
  row["triple_count"] = live;
  row["certified_count"] = certified;
  return row;
}

// ---- auth ----

ApiResponse login(Context& c) {
  return json_response(session_json(c.svc.accounts().authenticate(c.str("username"), c.str("password"))));
}

ApiResponse guest(Context& c) { return json_response(session_json(c.svc.accounts().guest_session())); }

ApiResponse logout(Context& c) {
  c.svc.accounts().logout(c.params.at("__token"));
  return json_response({{"ok", true}});
}

ApiResponse reset_password(Context& c) {
  auto account = c.svc.accounts().redeem_reset_token(c.str("token"), c.str("new_password"));
  c.actor.id = account.username;
  audit(c, "password_reset", account.id, json::object());
  return json_response({{"account", governance::account_summary(account)}});
}

// ---- catalog ----

ApiResponse catalog(Context& c) {
  const auto sort = c.query("sort").value_or("date");
  const auto order = c.query("order").value_or("asc");
  if (sort != "name" && sort != "status" && sort != "date") throw bad_request("sort must be name, status or date");
  if (order != "asc" && order != "desc") throw bad_request("order must be asc or desc");
  auto rows = c.svc.store().read([&](const store::StoreState& s) {
    std::vector<const store::DocumentRecord*> docs;
    for (const auto& id : s.document_order) docs.push_back(&s.document(id));
    auto key_less = [&](const store::DocumentRecord* a, const store::DocumentRecord* b) {
      if (sort == "name") {
        const auto la = text::ascii_lower(a->title);
        const auto lb = text::ascii_lower(b->title);
        if (la != lb) return la < lb;
      } else if (sort == "status") {
        if (a->state != b->state) return a->state < b->state;
      } else if (a->created_at != b->created_at) {
        return a->created_at < b->created_at;
      }
      return a->id < b->id;
    };
    std::stable_sort(docs.begin(), docs.end(), [&](auto* a, auto* b) { return order == "asc" ? key_less(a, b) : key_less(b, a); });
    json out = json::array();
    for (const auto* d : docs) out.push_back(document_row(s, *d));
    return out;
  });
  return json_response({{"documents", rows}, {"sort", sort}, {"order", order}});
}

ApiResponse graphs(Context& c) {
  auto out = c.svc.store().read([&](const store::StoreState& s) {
    json arr = json::array();
    for (const auto& gid : s.graph_order) {
      json docs = json::array();
      for (const auto& did : s.document_order) {
        if (s.document(did).graph_id == gid) docs.push_back(did);
      }
      arr.push_back({{"id", gid}, {"stats", store::compute_stats(s.graph(gid))}, {"documents", docs}});
    }
    return arr;
  });
  return json_response({{"graphs", out}});
}

// ---- documents ----

ApiResponse ingest(Context& c) {
  auto doc = ingest::parse_intake(c.body());
  auto cfg = c.svc.ingest_config();
  if (auto s = c.query("standard"); s && !s->empty()) {
    auto parsed = store::parse_standard(text::ascii_lower(text::trim(*s)));
    if (!parsed) throw bad_request("unknown standard '" + *s + "'");
    cfg.standard_override = parsed;
  }
  if (c.query("chunk_size")) cfg.chunk.chunk_size = static_cast<std::size_t>(std::max(0LL, c.query_int("chunk_size", 0)));
  if (c.query("overlap")) cfg.chunk.overlap = static_cast<std::size_t>(std::max(0LL, c.query_int("overlap", 0)));
  try {
    cfg.chunk.validate();
  } catch (const Error& e) {
    throw bad_request(e.what());
  }
  if (auto g = c.query("graph_id")) cfg.graph_id = *g;
  auto record = ingest::register_intake(doc, cfg, c.svc.store(), c.actor.id);
  c.svc.start_ingest(record.id, cfg, c.actor.id);
  return json_response({{"document_id", record.id}, {"graph_id", record.graph_id}, {"state", "Ingesting"}}, 202);
}

ApiResponse get_document(Context& c) {
  const auto& id = c.param("id");
  auto out = c.svc.store().read([&](const store::StoreState& s) {
    const auto& d = s.document(id);
    json row = document_row(s, d);
    row["pages"] = d.pages;
    return row;
  });
  return json_response(out);
}

ApiResponse document_report(Context& c) {
  const auto& id = c.param("id");
  auto doc = c.svc.store().get_document(id);
  json job = nullptr;
  if (auto j = c.svc.job(id)) {
    job = {{"status", j->status},
           {"chunks_done", j->progress.chunks_done},
           {"chunk_count", j->progress.chunk_count},
           {"error_code", j->error_code ? json(*j->error_code) : json(nullptr)},
           {"error_message", j->error_message}};
  }
  return json_response({{"document_id", id},
                        {"state", store::to_string(doc.state)},
                        {"progress", job},
                        {"report", doc.report}});
}

ApiResponse document_graph(Context& c) {
  const auto& id = c.param("id");
  store::EdgeFilter filter;
  filter.document_ids = std::set<std::string>{id};
  filter.predicates = c.query_list("predicates");
  filter.include_deleted = c.query_bool("include_deleted");
  if (filter.include_deleted) governance::require(c.actor, Action::AuditRead);
  const auto cap = checked_cap(c.query_int("cap", static_cast<long long>(c.svc.config().edge_cap)));
  const auto hops = checked_hops(c.query_int("hops", 1));
  const auto entity = c.query("entity");
  auto out = c.svc.store().read([&](const store::StoreState& s) {
    const auto& doc = s.document(id);
    const auto& g = s.graph(doc.graph_id);
    store::Subgraph sub;
    if (entity && !entity->empty()) {
      sub = store::neighborhood(g, *entity, hops, filter, cap);
    } else {
      std::set<std::string> seen;
      for (const auto& t : g.triples) {
        if (!store::edge_passes(t, filter)) continue;
        if (sub.edges.size() == cap) {
          sub.truncated = true;
          break;
        }
        sub.edges.push_back(t);
        for (const auto* eid : {&t.subject_id, &t.object_id}) {
          if (seen.insert(*eid).second) sub.nodes.push_back(g.entity(*eid));
        }
      }
      sub.stats = store::compute_stats(sub.nodes, sub.edges);
    }
    json j = sub;
    j["document_id"] = id;
    j["graph_id"] = doc.graph_id;
    return j;
  });
  return json_response(out);
}

ApiResponse document_readiness(Context& c) {
  return json_response(governance::to_json(governance::readiness(c.svc.store(), c.param("id"), c.svc.config().governance)));
}

ApiResponse document_certify(Context& c) {
  auto record = governance::certify_document(c.svc.store(), c.actor, c.param("id"), c.svc.config().governance);
  return json_response(governance::to_json(record));
}

// ---- triples ----

ApiResponse create_triple(Context& c) {
  const auto doc_id = c.str("document_id");
  const auto subject = c.str("subject");
  const auto predicate = c.str("predicate");
  const auto object = c.str("object");
  store::Provenance prov;
  prov.document_id = doc_id;
  if (auto p = c.opt_int("page")) prov.page = static_cast<int>(*p);
  prov.evidence_sentence = c.opt_str("evidence_sentence");
  const auto graph_id = c.svc.store().get_document(doc_id).graph_id;
  auto res = c.svc.store().insert_triple(graph_id, subject, predicate, object, prov, c.actor.id,
                                         store::Origin::ExpertAdded);
  return json_response({{"triple", res.record}, {"inserted", res.inserted}}, res.inserted ? 201 : 200);
}

ApiResponse get_triple(Context& c) {
  const auto& id = c.param("id");
  auto out = c.svc.store().read([&](const store::StoreState& s) {
    json j = s.triple(id);
    j["aggregate"] = governance::to_json(governance::aggregate_judgments(s, id));
    return j;
  });
  return json_response(out);
}

ApiResponse patch_triple(Context& c) {
  const auto& id = c.param("id");
  store::TriplePatch patch;
  patch.subject = c.opt_str("subject");
  patch.predicate = c.opt_str("predicate");
  patch.object = c.opt_str("object");
  if (patch.empty()) throw Error(ErrorCode::EmptyField, "patch names none of subject, predicate, object");
  return json_response(c.svc.store().update_triple(graph_of_triple(c, id), id, patch, c.actor.id));
}

ApiResponse delete_triple(Context& c) {
  const auto& id = c.param("id");
  const auto reason = c.opt_str("reason").value_or("");
  const auto gid = graph_of_triple(c, id);
  auto t = c.svc.store().write(
      [&](store::GraphStore::Writer& w) { return w.soft_delete_triple(gid, id, c.actor.id, reason); });
  return json_response(t);
}

ApiResponse restore_triple(Context& c) {
  const auto& id = c.param("id");
  return json_response(c.svc.store().restore_triple(graph_of_triple(c, id), id, c.actor.id));
}

ApiResponse triple_evidence(Context& c) {
  const auto& id = c.param("id");
  auto out = c.svc.store().read([&](const store::StoreState& s) {
    const auto& t = s.triple(id);
    const auto& d = s.document(t.provenance.document_id);
    return json{{"triple_id", t.id},
                {"subject", t.subject},
                {"predicate", t.predicate},
                {"object", t.object},
                {"document_id", d.id},
                {"document_title", d.title},
                {"source_file", d.source_file},
                {"page", t.provenance.page ? json(*t.provenance.page) : json(nullptr)},
                {"chunk_index", t.provenance.chunk_index ? json(*t.provenance.chunk_index) : json(nullptr)},
                {"evidence_sentence",
                 t.provenance.evidence_sentence ? json(*t.provenance.evidence_sentence) : json(nullptr)}};
  });
  return json_response(out);
}

ApiResponse post_judgment(Context& c) {
  governance::JudgmentInput in;
  in.triple_id = c.param("id");
  const auto action = c.str("action");
  auto parsed = store::parse_review_action(action);
  if (!parsed) throw bad_request("action must be keep, edit or delete");
  in.action = *parsed;
  if (c.body().contains("suggested_triple") && !c.body().at("suggested_triple").is_null()) {
    try {
      in.suggested_triple = c.body().at("suggested_triple").get<store::TripleText>();
    } catch (const json::exception&) {
      throw bad_request("suggested_triple must be {subject, predicate, object}");
    }
  }
  in.feedback = c.opt_str("feedback").value_or("");
  if (auto v = c.opt_str("verdict")) {
    in.verdict = store::parse_verdict(*v);
    if (!in.verdict) throw bad_request("verdict must be CORRECT, NEEDS_IMPROVEMENT or INCORRECT");
  }
  in.confidence = c.opt_number("confidence");
  in.apply = c.flag("apply");
  return json_response(governance::submit_judgment(c.svc.store(), c.actor, in), 201);
}

ApiResponse list_judgments(Context& c) {
  const auto& id = c.param("id");
  auto out = c.svc.store().read([&](const store::StoreState& s) {
    s.triple(id);
    json arr = json::array();
    for (const auto* j : s.judgments_for(id)) arr.push_back(*j);
    return json{{"triple_id", id},
                {"judgments", arr},
                {"aggregate", governance::to_json(governance::aggregate_judgments(s, id))}};
  });
  return json_response(out);
}

ApiResponse verify_triple(Context& c) {
  auto run = governance::run_verifier(c.svc.store(), c.actor, c.param("id"), c.svc.llm(), c.svc.prompts(),
                                      c.svc.config().llm.model_id, c.svc.config().retry);
  return json_response({{"assessment", governance::to_json(run.assessment)}, {"judgment", run.judgment}});
}

ApiResponse finalize_triple(Context& c) {
  auto t = governance::meta_finalize_triple(c.svc.store(), c.actor, c.param("id"), c.str("decision"),
                                            c.opt_str("note").value_or(""));
  return json_response(t);
}

// ---- fusion ----

ApiResponse fusion_overlaps(Context& c) {
  return json_response(fusion::to_json(fusion::detect_overlaps(c.svc.store(), c.strings("graph_ids", true))));
}

ApiResponse fusion_preview(Context& c) {
  const auto cap = checked_cap(c.opt_int("cap").value_or(static_cast<long long>(c.svc.config().edge_cap)));
  return json_response(fusion::to_json(fusion::build_fused_preview(c.svc.store(), c.strings("graph_ids", true), cap)));
}

ApiResponse fusion_merge(Context& c) {
  const auto& b = c.body();
  auto plan = fusion::merge_plan_from_json(b.contains("plan") ? b.at("plan") : b);
  if (plan.author.empty()) plan.author = c.actor.id;
  return json_response(fusion::to_json(fusion::apply_merge_plan(c.svc.store(), c.actor, plan)));
}

// ---- tasks ----

ApiResponse task(Context& c) {
  const auto& kind = c.param("kind");
  auto& st = c.svc.store();
  const auto graph_id = c.str("graph_id");
  const auto default_cap = static_cast<long long>(c.svc.config().edge_cap);
  if (kind == "kgqa") {
    tasks::KgqaOptions opts;
    opts.hops = checked_hops(c.opt_int("hops").value_or(opts.hops));
    if (auto k = c.opt_int("top_k")) {
      if (*k < 1) throw bad_request("top_k must be positive");
      opts.top_k = static_cast<std::size_t>(*k);
    }
    opts.edge_cap = checked_cap(c.opt_int("cap").value_or(default_cap));
    std::optional<tasks::KgqaLlm> llm;
    if (c.flag("use_llm", true)) llm = tasks::KgqaLlm{&c.svc.llm(), &c.svc.prompts(), c.svc.config().llm.model_id};
    return json_response(tasks::to_json(tasks::kgqa(st, c.str("question"), graph_id, opts, llm)));
  }
  if (kind == "paths") {
    const auto max_hops = checked_hops(c.opt_int("max_hops").value_or(3));
    const auto max_paths = c.opt_int("max_paths").value_or(10);
    if (max_paths < 1) throw bad_request("max_paths must be positive");
    auto paths = tasks::path_search(st, graph_id, c.str("source"), c.str("target"), max_hops,
                                    static_cast<std::size_t>(max_paths));
    return json_response({{"graph_id", graph_id}, {"paths", paths}});
  }
  if (kind == "neighborhood") {
    store::EdgeFilter filter;
    if (c.body().contains("predicates")) {
      auto preds = c.strings("predicates", false);
      filter.predicates = std::set<std::string>(preds.begin(), preds.end());
    }
    const auto hops = checked_hops(c.opt_int("hops").value_or(1));
    const auto cap = checked_cap(c.opt_int("cap").value_or(default_cap));
    return json_response(tasks::bounded_hop(st, graph_id, c.str("entity"), hops, filter, cap));
  }
  if (kind == "compare") {
    const auto names = c.strings("entities", true);
    return json_response(
        st.read([&](const store::StoreState& s) { return tasks::to_json(tasks::compare_entities(s, graph_id, names)); }));
  }
  if (kind == "duplicates") {
    const auto dist = c.opt_int("max_edit_distance").value_or(2);
    if (dist < 0 || dist > 8) throw bad_request("max_edit_distance must be within [0, 8]");
    return json_response(st.read([&](const store::StoreState& s) {
      return json{{"graph_id", graph_id},
                  {"pairs", tasks::to_json(tasks::detect_duplicates(s, graph_id, static_cast<std::size_t>(dist)))}};
    }));
  }
  if (kind == "gaps") {
    std::optional<tasks::Checklist> custom;
    if (c.body().contains("checklist") && !c.body().at("checklist").is_null()) {
      custom = tasks::checklist_from_json(c.body().at("checklist"));
    }
    return json_response(st.read([&](const store::StoreState& s) {
      const auto list = custom ? *custom : tasks::checklist_for_graph(s, graph_id);
      return tasks::to_json(tasks::coverage_gaps(s, graph_id, list));
    }));
  }
  if (kind == "diagnostics") {
    return json_response(
        st.read([&](const store::StoreState& s) { return tasks::to_json(tasks::schema_diagnostics(s, graph_id)); }));
  }
  if (kind == "trace") {
    tasks::TraceFilter f;
    f.entity = c.opt_str("entity");
    f.predicate = c.opt_str("predicate");
    f.document_id = c.opt_str("document_id");
    if (auto p = c.opt_int("page")) f.page = static_cast<int>(*p);
    return json_response(st.read([&](const store::StoreState& s) {
      return json{{"graph_id", graph_id}, {"triples", tasks::trace_to_json(tasks::provenance_trace(s, graph_id, f))}};
    }));
  }
  throw Error(ErrorCode::NotFound, "unknown task '" + kind + "'");
}

ApiResponse analytics(Context& c) {
  tasks::AnalysisRequest r;
  r.graph_id = c.str("graph_id");
  r.preset = c.opt_str("preset").value_or(r.preset);
  r.depth = static_cast<int>(c.opt_int("depth").value_or(r.depth));
  r.user_prompt = c.opt_str("user_prompt").value_or("");
  r.anomaly_detection = c.flag("anomaly_detection");
  auto run = tasks::run_analysis(c.svc.store(), r, c.svc.llm(), c.svc.prompts(), c.svc.config().llm.model_id,
                                 c.svc.config().retry);
  return json_response(tasks::to_json(run));
}

// ---- audit and export ----

ApiResponse audit_list(Context& c) {
  const auto from = c.query_int("from_seq", 0);
  if (from < 0) throw bad_request("from_seq must be non-negative");
  auto entries = c.svc.store().audit_entries(static_cast<std::uint64_t>(from), c.query("document_id").value_or(""));
  return json_response({{"entries", entries}});
}

ApiResponse audit_verify(Context& c) {
  auto v = c.svc.store().verify_audit();
  json j{{"ok", v.ok}, {"entries", v.entries}};
  if (v.first_bad_seq) j["first_bad_seq"] = *v.first_bad_seq;
  if (!v.reason.empty()) j["reason"] = v.reason;
  return json_response(j);
}

ApiResponse export_edges(Context& c) {
  const auto graph_id = c.query("graph_id");
  if (!graph_id || graph_id->empty()) throw Error(ErrorCode::EmptyField, "missing query parameter 'graph_id'");
  store::EdgeFilter filter;
  filter.predicates = c.query_list("predicates");
  filter.document_ids = c.query_list("document_id");
  if (auto statuses = c.query_list("status")) {
    std::set<store::TripleStatus> parsed;
    for (const auto& s : *statuses) parsed.insert(store::parse_triple_status(s));
    filter.statuses = parsed;
  }
  filter.include_deleted = c.query_bool("include_deleted");
  if (filter.include_deleted) governance::require(c.actor, Action::AuditRead);
  std::string format = c.query("format").value_or("");
  if (format.empty()) {
    auto accept = c.req.headers.find("accept");
    format = accept != c.req.headers.end() && accept->second.find("text/csv") != std::string::npos ? "csv" : "jsonl";
  }
  if (format != "csv" && format != "jsonl") throw bad_request("format must be csv or jsonl");
  auto rows = c.svc.store().export_edges(*graph_id, filter);
  if (format == "csv") return ApiResponse{200, edges_to_csv(rows), "text/csv; charset=utf-8"};
  return ApiResponse{200, edges_to_jsonl(rows), "application/x-ndjson"};
}

// ---- admin ----

ApiResponse list_accounts(Context& c) {
  json arr = json::array();
  for (const auto& a : c.svc.accounts().accounts()) arr.push_back(governance::account_summary(a));
  return json_response({{"accounts", arr}});
}

ApiResponse create_account(Context& c) {
  const auto role_name = c.str("role");
  auto role = governance::parse_role(role_name);
  if (!role) throw bad_request("unknown role '" + role_name + "'");
  auto account = c.svc.accounts().create_account(c.str("username"), c.str("password"), *role);
  audit(c, "account_created", account.id, {{"username", account.username}, {"role", governance::to_string(*role)}});
  return json_response(governance::account_summary(account), 201);
}

ApiResponse deactivate_account(Context& c) {
  auto account = c.svc.accounts().deactivate(c.param("id"));
  audit(c, "account_deactivated", account.id, {{"username", account.username}});
  return json_response(governance::account_summary(account));
}

ApiResponse issue_reset_token(Context& c) {
  auto token = c.svc.accounts().issue_reset_token(c.str("account_id"));
  // The audit chain stores a digest, never the bearer secret itself.
  audit(c, "reset_token_issued", token.account_id, {{"token_digest", sha256_hex(token.token)}});
  return json_response(
      {{"token", token.token}, {"account_id", token.account_id}, {"expires_at", format_timestamp(token.expires_at)}}, 201);
}

ApiResponse revoke_reset_token(Context& c) {
  const auto token = c.str("token");
  c.svc.accounts().revoke_reset_token(token);
  audit(c, "reset_token_revoked", "", {{"token_digest", sha256_hex(token)}});
  return json_response({{"ok", true}});
}

const std::vector<Route>& routes() {
  static const std::vector<Route> table = [] {
    std::vector<Route> r = {
        {"POST", "/auth/login", std::nullopt, login, {}},
        {"POST", "/auth/guest", std::nullopt, guest, {}},
        {"POST", "/auth/reset", std::nullopt, reset_password, {}},
        {"POST", "/auth/logout", Action::Read, logout, {}},
        {"GET", "/catalog", Action::Read, catalog, {}},
        {"GET", "/graphs", Action::Read, graphs, {}},
        {"POST", "/documents", Action::Ingest, ingest, {}},
        {"GET", "/documents/{id}", Action::Read, get_document, {}},
        {"GET", "/documents/{id}/report", Action::Read, document_report, {}},
        {"GET", "/documents/{id}/graph", Action::Read, document_graph, {}},
        {"GET", "/documents/{id}/readiness", Action::Read, document_readiness, {}},
        {"POST", "/documents/{id}/certify", Action::Certify, document_certify, {}},
        {"POST", "/triples", Action::TripleWrite, create_triple, {}},
        {"GET", "/triples/{id}", Action::Read, get_triple, {}},
        {"PATCH", "/triples/{id}", Action::TripleWrite, patch_triple, {}},
        {"DELETE", "/triples/{id}", Action::TripleWrite, delete_triple, {}},
        {"POST", "/triples/{id}/restore", Action::TripleWrite, restore_triple, {}},
        {"GET", "/triples/{id}/evidence", Action::Read, triple_evidence, {}},
        {"POST", "/triples/{id}/judgments", Action::Judge, post_judgment, {}},
        {"GET", "/triples/{id}/judgments", Action::Read, list_judgments, {}},
        {"POST", "/triples/{id}/verify", Action::RunVerifier, verify_triple, {}},
        {"POST", "/triples/{id}/finalize", Action::Finalize, finalize_triple, {}},
        {"POST", "/fusion/overlaps", Action::Read, fusion_overlaps, {}},
        {"POST", "/fusion/preview", Action::Read, fusion_preview, {}},
        {"POST", "/fusion/merge", Action::FusionMerge, fusion_merge, {}},
        {"POST", "/tasks/{kind}", Action::RunTask, task, {}},
        {"POST", "/analytics", Action::Analytics, analytics, {}},
        {"GET", "/audit", Action::AuditRead, audit_list, {}},
        {"GET", "/audit/verify", Action::AuditRead, audit_verify, {}},
        {"GET", "/export/edges", Action::Export, export_edges, {}},
        {"GET", "/admin/accounts", Action::ManageAccounts, list_accounts, {}},
        {"POST", "/admin/accounts", Action::ManageAccounts, create_account, {}},
        {"POST", "/admin/accounts/{id}/deactivate", Action::ManageAccounts, deactivate_account, {}},
        {"POST", "/admin/reset-tokens", Action::ManageResetTokens, issue_reset_token, {}},
        {"POST", "/admin/reset-tokens/revoke", Action::ManageResetTokens, revoke_reset_token, {}},
    };
    for (auto& route : r) route.segments = split_path(route.path);
    return r;
  }();
  return table;
}

std::string bearer_token(const ApiRequest& req) {
  auto it = req.headers.find("authorization");
  if (it == req.headers.end()) throw Error(ErrorCode::Unauthenticated, "missing bearer token");
  const std::string_view v = it->second;
  constexpr std::string_view prefix = "Bearer ";
  if (v.size() <= prefix.size() || text::ascii_lower(v.substr(0, prefix.size())) != "bearer ") {
    throw Error(ErrorCode::Unauthenticated, "malformed Authorization header");
  }
  return text::trim(v.substr(prefix.size()));
}

}  // namespace

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyName:
    case ErrorCode::EmptyField:
    case ErrorCode::InvalidArgument:
    case ErrorCode::EmptyDocument:
    case ErrorCode::NeedTwoGraphs:
    case ErrorCode::TooFewEntities:
    case ErrorCode::InvalidToken:
      return 400;
    case ErrorCode::Unauthenticated:
    case ErrorCode::SessionExpired:
    case ErrorCode::InvalidCredentials:
      return 401;
    case ErrorCode::Unauthorized:
      return 403;
    case ErrorCode::UnknownGraph:
    case ErrorCode::UnknownDocument:
    case ErrorCode::UnknownEntity:
    case ErrorCode::UnknownAccount:
    case ErrorCode::NotFound:
    case ErrorCode::NoEntityMatch:
      return 404;
    case ErrorCode::DuplicateGraph:
    case ErrorCode::CertifiedImmutable:
    case ErrorCode::DocumentCertified:
    case ErrorCode::AlreadyDeleted:
    case ErrorCode::NotDeleted:
    case ErrorCode::WrongState:
    case ErrorCode::NotReady:
    case ErrorCode::DuplicateUsername:
    case ErrorCode::PlanConflict:
      return 409;
    case ErrorCode::LlmUnavailable:
    case ErrorCode::ReplayMiss:
    case ErrorCode::SchemaViolation:
      return 502;
    case ErrorCode::InvalidConfig:
    case ErrorCode::MissingPrompt:
    case ErrorCode::ChainBroken:
    case ErrorCode::Io:
      return 500;
  }
  return 500;
}

ApiResponse error_response(const Error& e) {
  return json_response({{"code", error_code_name(e.code())}, {"message", e.what()}, {"detail", e.detail()}},
                       http_status(e.code()));
}

std::vector<RouteInfo> route_table() {
  std::vector<RouteInfo> out;
  for (const auto& r : routes()) {
    out.push_back({r.method, r.path,
                   r.permission ? std::optional<std::string>(std::string(governance::to_string(*r.permission)))
                                : std::nullopt});
  }
  return out;
}

Service::Service(ServiceConfig config, ServiceOptions options)
    : config_(std::move(config)), options_(std::move(options)) {
  prompts_ = load_prompts(config_);
  std::error_code ec;
  std::filesystem::create_directories(config_.data_dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create data directory " + config_.data_dir.string() + ": " + ec.message());
  store::GraphStore::Options so;
  so.log_path = config_.log_path();
  if (std::filesystem::exists(config_.snapshot_path())) so.snapshot_path = config_.snapshot_path();
  so.clock = options_.clock;
  store_ = std::make_unique<store::GraphStore>(std::move(so));
  governance::AccountStore::Options ao;
  ao.path = config_.accounts_path();
  ao.pbkdf2_iterations = config_.pbkdf2_iterations;
  ao.session_ttl = config_.session_ttl;
  ao.reset_token_ttl = config_.reset_token_ttl;
  ao.clock = options_.clock;
  accounts_ = std::make_unique<governance::AccountStore>(std::move(ao));
  llm_ = options_.llm ? options_.llm : std::shared_ptr<ingest::LlmClient>(make_llm_client(config_, options_.transport));
}

Service::~Service() { wait_for_jobs(); }

ingest::IngestConfig Service::ingest_config() const { return make_ingest_config(config_, prompts_); }

void Service::start_ingest(const std::string& document_id, const ingest::IngestConfig& cfg, const std::string& actor) {
  {
    std::lock_guard lock(jobs_mutex_);
    IngestJob job;
    job.progress.document_id = document_id;
    jobs_[document_id] = job;
  }
  auto run = [this, document_id, cfg, actor] {
    auto finish = [&](const std::string& status, std::optional<std::string> code, std::string message) {
      std::lock_guard lock(jobs_mutex_);
      auto& job = jobs_[document_id];
      job.status = status;
      job.error_code = std::move(code);
      job.error_message = std::move(message);
    };
    try {
      ingest::run_ingestion(document_id, cfg, prompts_, *llm_, *store_, actor, [&](const ingest::IngestProgress& p) {
        std::lock_guard lock(jobs_mutex_);
        jobs_[document_id].progress = p;
      });
      finish("done", std::nullopt, "");
    } catch (const Error& e) {
      finish("failed", std::string(error_code_name(e.code())), e.what());
    } catch (const std::exception& e) {
      finish("failed", std::string(error_code_name(ErrorCode::Io)), e.what());
    }
  };
  if (options_.synchronous_ingest) {
    run();
    return;
  }
  std::lock_guard lock(jobs_mutex_);
  workers_.emplace_back(run);
}

void Service::wait_for_jobs() {
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(jobs_mutex_);
    workers.swap(workers_);
  }
  for (auto& t : workers) t.join();
}

std::optional<IngestJob> Service::job(const std::string& document_id) const {
  std::lock_guard lock(jobs_mutex_);
  auto it = jobs_.find(document_id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second;
}

ApiResponse Service::handle(const ApiRequest& request) {
  try {
    const auto segs = split_path(request.path);
    const Route* found = nullptr;
    std::map<std::string, std::string> params;
    bool path_known = false;
    for (const auto& r : routes()) {
      std::map<std::string, std::string> p;
      if (!match(r, segs, p)) continue;
      path_known = true;
      if (r.method == request.method) {
        found = &r;
        params = std::move(p);
        break;
      }
    }
    if (!found) {
      throw Error(ErrorCode::NotFound, path_known ? "method " + request.method + " not allowed on " + request.path
                                                  : "no route for " + request.path);
    }
    Context ctx{*this, request, Actor{}, std::move(params), std::nullopt};
    if (found->permission) {
      const auto token = bearer_token(request);
      ctx.actor = accounts_->resolve(token).actor;
      governance::require(ctx.actor, *found->permission);
      ctx.params["__token"] = token;
    }
    return found->handler(ctx);
  } catch (const Error& e) {
    return error_response(e);
  } catch (const json::exception& e) {
    return error_response(Error(ErrorCode::InvalidArgument, std::string("malformed request: ") + e.what()));
  } catch (const std::exception& e) {
    return error_response(Error(ErrorCode::Io, std::string("internal error: ") + e.what()));
  }
}

}  // namespace certkg::service
