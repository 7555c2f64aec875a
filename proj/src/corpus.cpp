#include "logflat/corpus.hpp"

#include <array>
#include <chrono>
#include <random>
#include <set>

#include <json.hpp>

#include "logflat/error.hpp"
#include "logflat/time.hpp"

namespace logflat {

using json = nlohmann::ordered_json;

const std::vector<CorpusTemplate>& sensor_templates() {
  static const std::vector<CorpusTemplate> t{
      {"dionaea_connection", "dionaea.connections",
       {"remote_host", "connection_protocol", "local_port", "connection_type", "remote_hostname", "remote_port",
        "local_host", "connection_transport"}},
      {"p0f_syn_app", "p0f.events",
       {"client_ip", "app", "timestamp", "server_ip", "params", "raw_sig", "dist", "client_port", "mod", "server_port",
        "subject"}},
      {"p0f_uptime", "p0f.events",
       {"client_ip", "server_ip", "timestamp", "uptime", "subject", "client_port", "raw_freq", "server_port", "mod"}},
      {"p0f_host_change", "p0f.events",
       {"client_ip", "server_ip", "timestamp", "reason", "raw_hits", "subject", "client_port", "mod", "server_port"}},
      {"p0f_syn_os", "p0f.events",
       {"client_ip", "server_ip", "timestamp", "os", "params", "raw_sig", "dist", "client_port", "mod", "server_port",
        "subject"}},
      {"p0f_mtu", "p0f.events",
       {"client_ip", "server_ip", "timestamp", "link", "subject", "client_port", "mod", "server_port", "raw_mtu"}},
      {"cowrie_session", "cowrie.sessions",
       {"hostIP", "loggedin", "commands", "unknownCommands", "startTime", "peerPort", "version", "urls", "session",
        "ttylog", "credentials", "endTime", "peerIP", "hostPort"}},
      {"glastopf_event", "glastopf.events",
       {"sensorid", "request_raw", "request_url", "filename", "source", "pattern", "version", "time"}},
      {"snort_udp", "snort.alerts",
       {"tos", "ttl", "ethdst", "ethetype", "udplength", "sensor", "priority", "destination_ip", "timestamp",
        "signature", "classification", "ethlen", "dgnlen", "destination_port", "header", "source_port", "proto",
        "source_ip", "iplen", "ethsrc"}},
      {"snort_tcp", "snort.alerts",
       {"destination_port", "timestamp", "tcpflags", "tcpwin", "dgnlen", "tcpack", "classification", "sensor", "proto",
        "tcpseq", "header", "source_ip", "iplen", "tos", "ttl", "ethetype", "priority", "destination_ip", "tcpen",
        "ethlen", "ethdst", "source_port", "signature", "ethsrc"}},
      {"snort_icmp", "snort.alerts",
       {"timestamp", "destination_ip", "dgnlen", "classification", "sensor", "proto", "header", "source_ip", "iplen",
        "tos", "ttl", "ethetype", "priority", "icmpcode", "icmpseq", "ethlen", "ethsrc", "ethdst", "icmpid",
        "signature", "icmptype"}},
      {"amun_event", "amun.events", {"daddr", "md5", "url", "dport", "sport", "sha512", "saddr"}},
      {"shockpot_event", "shockpot.events",
       {"url", "@timestamp", "honeypot", "payloadCommand", "headers", "method", "payloadMd5", "form", "payloadBinary",
        "payloadResource", "type", "source"}},
  };
  return t;
}

const std::vector<std::string>& shared_fields() {
  static const std::vector<std::string> f{"_id", "channel", "ident", "normalized", "timestamp"};
  return f;
}

namespace {

// Fields whose values are lists; these never get nulled.
const std::set<std::string> kListFields{"commands", "unknownCommands", "urls", "credentials"};
// Values the generator keeps present so the namespace fixture stays intact.
const std::set<std::string> kNeverNull{"proto", "connection_protocol", "raw_sig", "header", "raw_hits"};

class Generator {
 public:
  explicit Generator(std::uint64_t seed) : rng_(seed) {}

  json record(const CorpusTemplate& t, double null_rate) {
    using namespace std::chrono;
    // 2016-07-01T00:00:00Z plus up to 120 days.
    const Instant base{sys_days{year{2016} / July / 1}};
    t_ = base + nanoseconds(static_cast<std::int64_t>(pick(120ull * 86400 * 1000000000ull)));
    iplen_ = 40 + static_cast<std::int64_t>(pick(1461));

    json payload = json::object();
    for (const auto& f : t.fields) {
      if (!kListFields.contains(f) && !kNeverNull.contains(f) && chance(null_rate)) {
        payload[f] = nullptr;
      } else {
        payload[f] = value(f, t);
      }
    }
    json rec = json::object();
    rec["_id"] = {{"$oid", hex(24)}};
    rec["channel"] = t.channel;
    rec["ident"] = "sensor-" + std::to_string(pick(6));
    rec["normalized"] = true;
    rec["payload"] = std::move(payload);
    rec["timestamp"] = {{"$date", format_rfc3339(std::chrono::floor<std::chrono::milliseconds>(t_))}};
    return rec;
  }

 private:
  std::uint64_t pick(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng_); }
  bool chance(double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < p; }
  std::int64_t range(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(pick(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  template <typename T, std::size_t N>
  T one_of(const std::array<T, N>& options) {
    return options[pick(N)];
  }

  std::string hex(std::size_t n) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += digits[pick(16)];
    return s;
  }

  std::string ip(const std::string& prefix, int octets) {
    std::string s = prefix;
    for (int i = 0; i < octets; ++i) s += "." + std::to_string(range(1, 254));
    return s;
  }

  std::string mac() {
    std::string s;
    for (int i = 0; i < 6; ++i) {
      if (i) s += '-';
      s += hex(2);
    }
    return s;
  }

  std::string text(const std::string& field, std::uint64_t spread = 40) {
    return field + "-" + std::to_string(pick(spread));
  }

  // RFC 3339 with nanoseconds and the +02:00 offset the sensors logged in.
  std::string local_time(Instant t) {
    std::string s = format_rfc3339(t + std::chrono::hours(2));
    s.pop_back();
    return s + "+02:00";
  }

  std::string plain_time(Instant t) {
    std::string s = format_rfc3339(std::chrono::floor<std::chrono::seconds>(t));
    s.pop_back();
    s[10] = ' ';
    return s;
  }

  json value(const std::string& f, const CorpusTemplate& t) {
    // dionaea
    if (f == "remote_host") return ip("192.0.2", 1);
    if (f == "local_host") return ip("10.2.0", 1);
    if (f == "remote_hostname") return "host-" + std::to_string(pick(200)) + ".example.net";
    if (f == "remote_port") return range(1024, 32767);
    if (f == "local_port") return one_of(std::array{21, 42, 135, 445, 1433});
    // Half of this value set is shared with snort's proto.
    if (f == "connection_protocol") return one_of(std::array{"tcp", "udp", "icmp", "smbd", "httpd", "ftpd"});
    if (f == "connection_type") return one_of(std::array{"accept", "connect", "listen"});
    if (f == "connection_transport") return one_of(std::array{"tcp", "udp"});
    // p0f
    if (f == "client_ip") return ip("198.51.100", 1);
    if (f == "server_ip") return ip("10.0.0", 1);
    if (f == "client_port") return range(32768, 49151);
    if (f == "server_port") return one_of(std::array{22, 25, 80, 443});
    if (f == "timestamp") return local_time(t_);
    if (f == "raw_sig") {
      return "4:" + std::string(one_of(std::array{"64", "128"})) + ":0:*:" +
             one_of(std::array{"1024", "8192", "65535"}) + "," + std::to_string(pick(8)) + ":" +
             one_of(std::array{"mss,nop,ws", "mss,sok,ts"}) + ":df,id+:0";
    }
    if (f == "params") return one_of(std::array{"none", "generic", "tstamp+", "exws"});
    if (f == "dist") return range(0, 24);
    if (f == "mod") return one_of(std::array{"syn", "syn+ack", "uptime", "mtu", "host change"});
    if (f == "subject") return one_of(std::array{"cli", "srv"});
    if (f == "app") return one_of(std::array{"Firefox 10.x", "Chrome 40.x", "wget", "curl"});
    if (f == "os") return one_of(std::array{"Linux 3.11 and newer", "Windows 7 or 8", "FreeBSD", "???"});
    if (f == "uptime") return std::to_string(pick(90)) + " days " + std::to_string(pick(24)) + " hrs";
    if (f == "raw_freq") return std::to_string(one_of(std::array{100, 250, 1000})) + ".00 Hz";
    if (f == "reason") return one_of(std::array{"tstamp", "ip", "port"});
    if (f == "raw_hits") {
      return std::to_string(pick(3)) + "," + std::to_string(pick(3)) + "," + std::to_string(pick(3)) + "," +
             std::to_string(pick(3));
    }
    if (f == "link") return one_of(std::array{"Ethernet or modem", "DSL", "GIF", "VLAN"});
    if (f == "raw_mtu") return one_of(std::array{1500, 1492, 1480, 1280});
    // cowrie
    if (f == "hostIP") return ip("10.3.0", 1);
    if (f == "peerIP") return ip("100.64", 2);
    if (f == "hostPort") return one_of(std::array{22, 2222});
    if (f == "peerPort") return range(1024, 32767);
    if (f == "loggedin") return one_of(std::array{"root/1234", "admin/admin", "root/root", "pi/raspberry"});
    if (f == "commands" || f == "unknownCommands") {
      static const std::array pool{"uname -a", "cat /proc/cpuinfo", "free -m", "cd /tmp", "ps x", "w"};
      json list = json::array();
      const std::size_t n = 1 + pick(f == "commands" ? 3 : 2);
      for (std::size_t i = 0; i < n; ++i) list.push_back(one_of(pool));
      return list;
    }
    if (f == "urls") {
      json list = json::array();
      const std::size_t n = 1 + pick(2);
      for (std::size_t i = 0; i < n; ++i) list.push_back("http://evil" + std::to_string(pick(20)) + ".example/x.sh");
      return list;
    }
    if (f == "credentials") {
      json list = json::array();
      const std::size_t n = 1 + pick(2);
      for (std::size_t i = 0; i < n; ++i) {
        list.push_back(json::array({one_of(std::array{"root", "admin", "pi", "user"}),
                                    one_of(std::array{"1234", "admin", "password", "raspberry"})}));
      }
      return list;
    }
    if (f == "startTime") return local_time(t_);
    if (f == "endTime") return local_time(t_ + std::chrono::seconds(range(1, 600)));
    if (f == "version") {
      if (t.name == "cowrie_session") return one_of(std::array{"SSH-2.0-libssh-0.6.3", "SSH-2.0-PUTTY", "SSH-2.0-Go"});
      return one_of(std::array{"3.1.2", "3.1.3"});
    }
    if (f == "session") return hex(12);
    if (f == "ttylog") return "log/tty/" + hex(8) + ".log";
    // glastopf
    if (f == "sensorid") return hex(8);
    if (f == "request_raw") return "GET /" + text("page") + " HTTP/1.1";
    if (f == "request_url") return "/" + text("page") + "?id=" + std::to_string(pick(100));
    if (f == "filename") return text("file");
    if (f == "source") return ip("203.0.113", 1);
    if (f == "pattern") return one_of(std::array{"unknown", "rfi", "lfi", "sqli", "phpinfo"});
    if (f == "time") return plain_time(t_);
    // snort
    if (f == "tos") return one_of(std::array{0, 8, 16});
    if (f == "ttl") return range(32, 128);
    if (f == "ethsrc" || f == "ethdst") return mac();
    if (f == "ethetype") return one_of(std::array{"0x800", "0x86DD"});
    if (f == "iplen") return iplen_;
    if (f == "ethlen") return iplen_ + 14;
    if (f == "dgnlen") return iplen_;
    if (f == "udplength") return iplen_ - 20;
    if (f == "sensor") return hex(6);
    if (f == "priority") return range(1, 3);
    if (f == "destination_ip") return ip("10.1", 2);
    if (f == "source_ip") return ip("203.0.113", 1);
    if (f == "destination_port") return one_of(std::array{21, 23, 53, 445, 1433, 3389, 8080});
    if (f == "source_port") return range(49152, 65534);
    if (f == "signature") return text("signature", 25);
    if (f == "classification") return one_of(std::array{"attempted-recon", "misc-activity", "bad-unknown"});
    if (f == "header") return "1:" + std::to_string(2000000 + pick(5000)) + ":" + std::to_string(1 + pick(20));
    if (f == "proto") {
      if (t.name == "snort_udp") return "udp";
      if (t.name == "snort_tcp") return "tcp";
      return "icmp";
    }
    if (f == "tcpflags") return one_of(std::array{"******S*", "***A**S*", "***AP***"});
    if (f == "tcpwin") return range(512, 65535);
    if (f == "tcpseq" || f == "tcpack") return range(0, 4294967295LL);
    if (f == "tcpen") return one_of(std::array{20, 32, 40});
    if (f == "icmpcode") return range(0, 3);
    if (f == "icmptype") return one_of(std::array{0, 3, 8, 11});
    if (f == "icmpid" || f == "icmpseq") return range(0, 65535);
    // amun
    if (f == "daddr") return ip("10.4.0", 1);
    if (f == "saddr") return ip("172.16", 2);
    if (f == "dport") return one_of(std::array{135, 139, 445, 2967});
    if (f == "sport") return range(1024, 65535);
    if (f == "md5") return hex(32);
    if (f == "sha512") return hex(128);
    if (f == "url") return "http://" + text("dl") + ".example/" + text("bin") + ".exe";
    // shockpot
    if (f == "@timestamp") return format_rfc3339(t_);
    if (f == "honeypot") return one_of(std::array{"19", "20", "21"});
    if (f == "payloadCommand") {
      const char* c = one_of(std::array{"", "", "", "wget", "curl"});
      if (*c == '\0') return nullptr;
      return c;
    }
    if (f == "headers") return "User-Agent=" + text("agent", 10);
    if (f == "method") return one_of(std::array{"GET", "POST", "HEAD"});
    if (f == "payloadMd5") return hex(32);
    if (f == "form") return text("form");
    if (f == "payloadBinary") return hex(16);
    if (f == "payloadResource") return "/cgi-bin/" + text("cgi", 10);
    if (f == "type") return one_of(std::array{"shellshock", "probe"});
    return text(f);
  }

  std::mt19937_64 rng_;
  Instant t_{};
  std::int64_t iplen_ = 0;
};

}  // namespace

std::size_t generate_corpus(std::ostream& out, const CorpusOptions& options) {
  const auto& all = sensor_templates();
  std::vector<std::size_t> chosen = options.templates;
  if (chosen.empty()) {
    for (std::size_t i = 0; i < all.size(); ++i) chosen.push_back(i);
  }
  for (auto i : chosen) {
    if (i >= all.size()) throw ConfigError("template index " + std::to_string(i) + " out of range");
  }
  if (!(options.null_rate >= 0.0 && options.null_rate <= 1.0)) throw ConfigError("null_rate must be in [0, 1]");
  Generator gen(options.seed);
  std::size_t lines = 0;
  for (std::size_t k = 0; k < options.records_per_schema; ++k) {
    for (auto i : chosen) {
      out << gen.record(all[i], options.null_rate).dump() << '\n';
      ++lines;
    }
  }
  return lines;
}

}  // namespace logflat
