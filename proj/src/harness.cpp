#include "scalesentry/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <fstream>
#include <map>
#include <set>

#include "scalesentry/errors.hpp"
#include "scalesentry/logpipe.hpp"
#include "scalesentry/rng.hpp"

namespace scalesentry {

namespace fs = std::filesystem;

namespace {

std::string fixed(double value, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, value);
    return buf;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& line : lines) out << line << '\n';
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

}  // namespace

SimulationConfig default_simulation(int condition_id, std::uint64_t rng_seed) {
    SimulationConfig config;
    config.condition = build_condition(condition_id, rng_seed);
    return config;
}

void to_json(nlohmann::json& j, const SimulationConfig& c) {
    j = nlohmann::json{
        {"traffic", c.condition.traffic},
        {"sentinel", c.condition.policy},
        {"tier",
         {{"per_pod_capacity_rps", c.tier.per_pod_capacity_rps},
          {"pod_startup_delay_s", c.tier.pod_startup_delay_s},
          {"queue_cap", c.tier.queue_cap},
          {"client_timeout_s", c.tier.client_timeout_s},
          {"reject_latency_s", c.tier.reject_latency_s}}},
        {"hpa",
         {{"min_replicas", c.hpa.min_replicas},
          {"max_replicas", c.hpa.max_replicas},
          {"trigger_threshold", c.hpa.trigger_threshold},
          {"trigger_window_s", c.hpa.trigger_window_s},
          {"stabilization_s", c.hpa.stabilization_s},
          {"reconcile_period_s", c.hpa.reconcile_period_s}}},
        {"forest", c.forest},
        {"cluster", {{"propagation_delay_s", c.propagation_delay_s}, {"tick_s", c.tick_s}}},
    };
}

void from_json(const nlohmann::json& j, SimulationConfig& c) {
    SimulationConfig out;
    out.condition.traffic = j.at("traffic").get<TrafficSpec>();
    out.condition.policy = j.value("sentinel", SentinelPolicy{});
    if (j.contains("tier")) {
        const auto& t = j.at("tier");
        out.tier.per_pod_capacity_rps = t.value("per_pod_capacity_rps", out.tier.per_pod_capacity_rps);
        out.tier.pod_startup_delay_s = t.value("pod_startup_delay_s", out.tier.pod_startup_delay_s);
        out.tier.queue_cap = t.value("queue_cap", out.tier.queue_cap);
        out.tier.client_timeout_s = t.value("client_timeout_s", out.tier.client_timeout_s);
        out.tier.reject_latency_s = t.value("reject_latency_s", out.tier.reject_latency_s);
    }
    if (j.contains("hpa")) {
        const auto& h = j.at("hpa");
        out.hpa.min_replicas = h.value("min_replicas", out.hpa.min_replicas);
        out.hpa.max_replicas = h.value("max_replicas", out.hpa.max_replicas);
        out.hpa.trigger_threshold = h.value("trigger_threshold", out.hpa.trigger_threshold);
        out.hpa.trigger_window_s = h.value("trigger_window_s", out.hpa.trigger_window_s);
        out.hpa.stabilization_s = h.value("stabilization_s", out.hpa.stabilization_s);
        out.hpa.reconcile_period_s = h.value("reconcile_period_s", out.hpa.reconcile_period_s);
    }
    if (j.contains("forest")) out.forest = j.at("forest").get<ForestParams>();
    if (j.contains("cluster")) {
        out.propagation_delay_s = j.at("cluster").value("propagation_delay_s", out.propagation_delay_s);
        out.tick_s = j.at("cluster").value("tick_s", out.tick_s);
    }
    c = std::move(out);
}

void apply_override(SimulationConfig& config, const std::string& assignment) {
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
        throw ConfigError("override must look like section.field=value: '" + assignment + "'");
    const std::string section = assignment.substr(0, dot);
    const std::string field = assignment.substr(dot + 1, eq - dot - 1);
    const std::string raw = assignment.substr(eq + 1);

    nlohmann::json j = config;
    if (!j.contains(section) || !j[section].contains(field))
        throw ConfigError("unknown override key '" + section + "." + field + "'");
    nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    j[section][field] = value;
    try {
        config = j.get<SimulationConfig>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("bad value for '" + section + "." + field + "': " + e.what());
    }
}

std::string run_id_for(int condition_id, int repetition) {
    return "c" + std::to_string(condition_id) + "-r" + std::to_string(repetition);
}

RunArtifacts simulate(const SimulationConfig& config, int repetition) {
    const TrafficSpec& traffic = config.condition.traffic;
    const SentinelPolicy& policy = config.condition.policy;
    validate(traffic);
    validate(policy);
    validate(config.forest);
    if (!(config.tick_s > 0.0)) throw ConfigError("tick_s must be positive");

    RunArtifacts run;
    run.run_id = run_id_for(traffic.condition_id, repetition);
    run.config = config;

    const IpPool pool = make_ip_pool(traffic);
    const std::vector<RequestEvent> events = generate_stream(traffic, pool);
    for (const auto& ip : pool.attacker_ips) run.diagnostics.attacker_ips.push_back(ip.to_string());
    std::sort(run.diagnostics.attacker_ips.begin(), run.diagnostics.attacker_ips.end());

    HpaSpec hpa = config.hpa;
    run.hpa = initial_status(hpa);
    PodTier service = PodTier::service(config.tier, hpa.min_replicas);
    PodTier honeypot = PodTier::honeypot();
    RoutingTable routing;
    LogEmitter emitter(traffic.malformed_log_rate, derive_seed(traffic.rng_seed, Stream::log_corruption));

    RunResult& res = run.result;
    RunDiagnostics& diag = run.diagnostics;
    res.condition_id = traffic.condition_id;
    res.repetition = repetition;
    diag.total_requests = events.size();
    diag.max_replicas_trajectory.push_back(hpa.max_replicas);

    const Selector five_xx{Tier::service, StatusClass::server_5xx, std::nullopt};
    const auto reconcile_every = static_cast<long>(std::max(1.0, hpa.reconcile_period_s / config.tick_s));
    std::set<long> script_ticks;
    for (double t : policy.run_times_s) script_ticks.insert(std::lround(t / config.tick_s));

    struct Dispatched {
        double at;
        bool attacker;
        bool scan;
        Tier tier;
    };
    std::vector<Dispatched> dispatched;
    dispatched.reserve(events.size());

    std::deque<RequestEvent> backlog;
    std::size_t next = 0;
    double last_completion = 0.0;
    const double first_arrival = events.empty() ? 0.0 : events.front().t_arrival;
    std::vector<Outcome> outcomes;

    for (long tick_index = 0;; ++tick_index) {
        const double now = static_cast<double>(tick_index) * config.tick_s;
        while (next < events.size() && events[next].t_arrival < now + config.tick_s) backlog.push_back(events[next++]);

        outcomes = service.begin_tick(now, config.tick_s);
        honeypot.begin_tick(now, config.tick_s);
        while (!backlog.empty()) {
            RequestEvent ev = backlog.front();
            ev.t_arrival = std::max(ev.t_arrival, now);
            const Tier tier = route(ev, routing, ev.t_arrival);
            PodTier& target = tier == Tier::honeypot ? honeypot : service;
            auto admission = target.admit(ev, traffic.concurrency);
            if (admission.kind == PodTier::Admission::Kind::deferred) break;
            backlog.pop_front();
            dispatched.push_back({ev.t_arrival, pool.is_attacker(ev.source_ip), ev.path != kHomePath, tier});
            if (admission.outcome) outcomes.push_back(std::move(*admission.outcome));
        }

        for (const Outcome& o : outcomes) {
            run.metrics.record(now, labels_for(o));
            last_completion = std::max(last_completion, o.t_complete);
            if (o.tier_served == Tier::honeypot) {
                ++diag.honeypot_outcomes;
                run.honeypot_lines.push_back(format_access(LogEmitter::access_entry_for(o)));
                continue;
            }
            ++diag.service_outcomes;
            switch (o.status) {
                case 499: ++diag.service_timed_out; break;
                case 503: ++diag.service_rejected; break;
                case 200: ++diag.service_ok; break;
                default: ++diag.service_not_found; break;
            }
            EmittedLines lines = emitter.emit(o);
            diag.malformed_injected += lines.access_corrupted ? 1 : 0;
            run.access_lines.push_back(std::move(lines.access));
            if (lines.error) run.error_lines.push_back(std::move(*lines.error));
        }

        if (tick_index % reconcile_every == 0) {
            const auto metric = run.metrics.increase(five_xx, QueryWindow{hpa.trigger_window_s}, now);
            reconcile(hpa, run.hpa, metric, now);
            service.apply_scale(run.hpa.desired, now);
        }

        if (script_ticks.contains(tick_index)) {
            ScriptRun script = run_script(now, policy,
                                          SentinelContext{run.access_lines, run.error_lines, config.forest, routing,
                                                          config.propagation_delay_s, hpa, run.hpa});
            service.apply_scale(run.hpa.desired, now);
            diag.max_replicas_trajectory.push_back(script.decision.max_replicas_set);
            if (script.model) run.models.push_back(std::move(*script.model));
            run.decisions.push_back(std::move(script.decision));
        }

        TimelineRow row;
        row.t = now;
        row.service = service.tick_stats();
        row.honeypot = honeypot.tick_stats();
        row.replicas_ready = service.replicas_ready();
        row.replicas_desired = service.replicas_desired();
        row.max_replicas = hpa.max_replicas;
        row.queue_depth = service.queue_depth();
        row.client_backlog = backlog.size();
        run.timeline.push_back(row);

        const bool traffic_done = next == events.size() && backlog.empty() && service.queue_depth() == 0;
        const bool scripts_done = script_ticks.empty() || tick_index >= *script_ticks.rbegin();
        if (traffic_done && scripts_done) break;
    }

    for (const auto& d : dispatched) {
        if (d.scan) ++(d.tier == Tier::honeypot ? res.honeypot_attacks_received : res.nginx_attacks_received);
    }
    res.five_xx_count = diag.service_rejected;
    res.total_request_time_s = last_completion - first_arrival;
    if (!run.decisions.empty()) {
        const SentinelDecision& first = run.decisions.front();
        res.first_f1 = first.f1;
        res.first_ip_future_rate = first.top_attackers.empty() ? 0.0 : first.top_attackers.front().score;
        for (const auto& r : first.top_attackers) diag.first_top_ips.push_back(r.ip.to_string());

        const double isolated_from = first.t + config.propagation_delay_s;
        const double last_dispatch = dispatched.empty() ? 0.0 : dispatched.back().at;
        for (const auto& d : dispatched) {
            if (d.attacker && d.at > isolated_from) {
                ++diag.attacker_requests_after_isolation;
                if (d.tier == Tier::honeypot) ++diag.attacker_requests_after_isolation_on_honeypot;
            }
            if (d.scan && d.tier == Tier::service && d.at > last_dispatch - 60.0) ++diag.service_scans_final_minute;
        }
    }
    diag.malformed_dropped = preprocess(run.access_lines, {}).malformed_access;
    return run;
}

nlohmann::json to_json(const RunResult& r, const RunDiagnostics& d) {
    return nlohmann::json{
        {"condition", r.condition_id},
        {"repetition", r.repetition},
        {"nginx_attacks_received", r.nginx_attacks_received},
        {"five_xx_count", r.five_xx_count},
        {"honeypot_attacks_received", r.honeypot_attacks_received},
        {"total_request_time_s", r.total_request_time_s},
        {"first_f1", r.first_f1},
        {"first_ip_future_rate", r.first_ip_future_rate},
        {"diagnostics",
         {{"total_requests", d.total_requests},
          {"service_outcomes", d.service_outcomes},
          {"honeypot_outcomes", d.honeypot_outcomes},
          {"service_ok", d.service_ok},
          {"service_not_found", d.service_not_found},
          {"service_timed_out", d.service_timed_out},
          {"service_rejected", d.service_rejected},
          {"attacker_requests_after_isolation", d.attacker_requests_after_isolation},
          {"attacker_requests_after_isolation_on_honeypot", d.attacker_requests_after_isolation_on_honeypot},
          {"service_scans_final_minute", d.service_scans_final_minute},
          {"malformed_injected", d.malformed_injected},
          {"malformed_dropped", d.malformed_dropped},
          {"attacker_ips", d.attacker_ips},
          {"first_top_ips", d.first_top_ips},
          {"max_replicas_trajectory", d.max_replicas_trajectory}}},
    };
}

RunResult run_result_from_json(const nlohmann::json& j) {
    RunResult r;
    r.condition_id = j.at("condition").get<int>();
    r.repetition = j.at("repetition").get<int>();
    r.nginx_attacks_received = j.at("nginx_attacks_received").get<std::size_t>();
    r.five_xx_count = j.at("five_xx_count").get<std::size_t>();
    r.honeypot_attacks_received = j.at("honeypot_attacks_received").get<std::size_t>();
    r.total_request_time_s = j.at("total_request_time_s").get<double>();
    r.first_f1 = j.at("first_f1").get<double>();
    r.first_ip_future_rate = j.at("first_ip_future_rate").get<double>();
    return r;
}

RunDiagnostics diagnostics_from_json(const nlohmann::json& j) {
    const auto& d = j.at("diagnostics");
    RunDiagnostics out;
    out.total_requests = d.at("total_requests").get<std::size_t>();
    out.service_outcomes = d.at("service_outcomes").get<std::size_t>();
    out.honeypot_outcomes = d.at("honeypot_outcomes").get<std::size_t>();
    out.service_ok = d.at("service_ok").get<std::size_t>();
    out.service_not_found = d.at("service_not_found").get<std::size_t>();
    out.service_timed_out = d.at("service_timed_out").get<std::size_t>();
    out.service_rejected = d.at("service_rejected").get<std::size_t>();
    out.attacker_requests_after_isolation = d.at("attacker_requests_after_isolation").get<std::size_t>();
    out.attacker_requests_after_isolation_on_honeypot =
        d.at("attacker_requests_after_isolation_on_honeypot").get<std::size_t>();
    out.service_scans_final_minute = d.at("service_scans_final_minute").get<std::size_t>();
    out.malformed_injected = d.at("malformed_injected").get<std::size_t>();
    out.malformed_dropped = d.at("malformed_dropped").get<std::size_t>();
    out.attacker_ips = d.at("attacker_ips").get<std::vector<std::string>>();
    out.first_top_ips = d.at("first_top_ips").get<std::vector<std::string>>();
    out.max_replicas_trajectory = d.at("max_replicas_trajectory").get<std::vector<int>>();
    return out;
}

void ensure_writable_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
    const fs::path probe = dir / ".write-probe";
    {
        std::ofstream out(probe);
        if (!out || !(out << "ok")) throw IoError("output directory is not writable: " + dir.string());
    }
    fs::remove(probe, ec);
}

void write_run(const RunArtifacts& run, const fs::path& output_dir) {
    const fs::path run_dir = output_dir / "runs" / run.run_id;
    const fs::path log_dir = output_dir / "logs" / run.run_id;
    const fs::path model_dir = output_dir / "model";
    for (const auto& d : {run_dir, log_dir, model_dir}) ensure_writable_dir(d);

    open_out(run_dir / "result.json") << to_json(run.result, run.diagnostics).dump(2) << '\n';
    open_out(run_dir / "config.json") << nlohmann::json(run.config).dump(2) << '\n';

    {
        auto out = open_out(run_dir / "sentinel.jsonl");
        for (const auto& d : run.decisions) out << to_json(d).dump() << '\n';
    }
    {
        auto out = open_out(run_dir / "hpa_history.csv");
        export_history_csv(run.hpa, out);
    }
    {
        auto out = open_out(run_dir / "metrics.csv");
        run.metrics.export_csv(out);
    }
    {
        auto out = open_out(run_dir / "timeline.csv");
        out << "t,service_2xx,service_4xx,service_499,service_5xx,honeypot_2xx,honeypot_4xx,"
               "replicas_ready,replicas_desired,max_replicas,queue_depth,client_backlog\n";
        for (const auto& r : run.timeline)
            out << r.t << ',' << r.service.ok << ',' << r.service.not_found << ',' << r.service.timed_out << ','
                << r.service.rejected << ',' << r.honeypot.ok << ',' << r.honeypot.not_found << ','
                << r.replicas_ready << ',' << r.replicas_desired << ',' << r.max_replicas << ',' << r.queue_depth
                << ',' << r.client_backlog << '\n';
    }
    write_lines(log_dir / "access.log", run.access_lines);
    write_lines(log_dir / "error.log", run.error_lines);
    write_lines(log_dir / "honeypot.log", run.honeypot_lines);
    for (std::size_t i = 0; i < run.models.size(); ++i)
        save_model(run.models[i], model_dir / (run.run_id + "-" + std::to_string(i + 1) + ".json"));
}

RunResult average(const std::vector<RunResult>& rows) {
    RunResult avg;
    if (rows.empty()) return avg;
    avg.condition_id = rows.front().condition_id;
    double nginx = 0, fivexx = 0, honeypot = 0, time = 0, f1 = 0, rate = 0;
    for (const auto& r : rows) {
        nginx += static_cast<double>(r.nginx_attacks_received);
        fivexx += static_cast<double>(r.five_xx_count);
        honeypot += static_cast<double>(r.honeypot_attacks_received);
        time += r.total_request_time_s;
        f1 += r.first_f1;
        rate += r.first_ip_future_rate;
    }
    const double n = static_cast<double>(rows.size());
    // Count columns are stored rounded to the nearest integer; exact means are in summary.csv.
    avg.nginx_attacks_received = static_cast<std::size_t>(std::llround(nginx / n));
    avg.five_xx_count = static_cast<std::size_t>(std::llround(fivexx / n));
    avg.honeypot_attacks_received = static_cast<std::size_t>(std::llround(honeypot / n));
    avg.total_request_time_s = time / n;
    avg.first_f1 = f1 / n;
    avg.first_ip_future_rate = rate / n;
    return avg;
}

ExperimentOutcome run_experiment(const ExperimentConfig& config) {
    if (config.repetitions < 1) throw ConfigError("repetitions must be >= 1");
    build_condition(config.condition_id, 0);  // reject bad ids before any work
    ensure_writable_dir(config.output_dir);

    ExperimentOutcome outcome;
    for (int rep = 1; rep <= config.repetitions; ++rep) {
        SimulationConfig sim =
            default_simulation(config.condition_id, derive_seed(config.master_seed, static_cast<std::uint64_t>(rep)));
        sim.tick_s = config.tick_s;
        for (const auto& o : config.overrides) apply_override(sim, o);
        // The repetition seed wins over any seed override so reps stay distinct.
        sim.condition.traffic.rng_seed = derive_seed(config.master_seed, static_cast<std::uint64_t>(rep));
        RunArtifacts run = simulate(sim, rep);
        write_run(run, config.output_dir);
        outcome.runs.push_back(run.result);
    }
    outcome.aggregate = average(outcome.runs);
    return outcome;
}

std::vector<RunResult> report(const fs::path& output_dir) {
    const fs::path runs_dir = output_dir / "runs";
    std::vector<RunResult> rows;
    if (fs::is_directory(runs_dir)) {
        for (const auto& entry : fs::directory_iterator(runs_dir)) {
            const fs::path result = entry.path() / "result.json";
            if (!fs::is_regular_file(result)) continue;
            std::ifstream in(result);
            rows.push_back(run_result_from_json(nlohmann::json::parse(in)));
        }
    }
    if (rows.empty()) throw IoError("no completed runs found under " + runs_dir.string());
    std::sort(rows.begin(), rows.end(), [](const RunResult& a, const RunResult& b) {
        return std::tie(a.condition_id, a.repetition) < std::tie(b.condition_id, b.repetition);
    });

    std::map<int, std::vector<RunResult>> by_condition;
    for (const auto& r : rows) by_condition[r.condition_id].push_back(r);

    const char* header =
        "nginx_attacks_received,five_xx_count,honeypot_attacks_received,total_request_time_s,first_f1,"
        "first_ip_future_rate\n";
    auto results = open_out(output_dir / "results.csv");
    results << "condition,repetition," << header;
    auto summary = open_out(output_dir / "summary.csv");
    summary << "condition,repetitions," << header;

    for (const auto& [condition, reps] : by_condition) {
        for (const auto& r : reps)
            results << condition << ',' << r.repetition << ',' << r.nginx_attacks_received << ',' << r.five_xx_count
                    << ',' << r.honeypot_attacks_received << ',' << fixed(r.total_request_time_s, 3) << ','
                    << fixed(r.first_f1, 4) << ',' << fixed(r.first_ip_future_rate, 4) << '\n';
        double nginx = 0, fivexx = 0, honeypot = 0;
        for (const auto& r : reps) {
            nginx += static_cast<double>(r.nginx_attacks_received);
            fivexx += static_cast<double>(r.five_xx_count);
            honeypot += static_cast<double>(r.honeypot_attacks_received);
        }
        const double n = static_cast<double>(reps.size());
        const RunResult avg = average(reps);
        const std::string tail = fixed(nginx / n, 3) + ',' + fixed(fivexx / n, 3) + ',' + fixed(honeypot / n, 3) +
                                 ',' + fixed(avg.total_request_time_s, 3) + ',' + fixed(avg.first_f1, 4) + ',' +
                                 fixed(avg.first_ip_future_rate, 4) + '\n';
        results << condition << ",average," << tail;
        summary << condition << ',' << reps.size() << ',' << tail;
    }
    return rows;
}

}  // namespace scalesentry
