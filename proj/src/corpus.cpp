// SPDX-License-Identifier: Apache-2.0
#include "spamnet/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "json.hpp"
#include "spamnet/common.hpp"

namespace spamnet {

namespace {

using json = nlohmann::ordered_json;

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string lower_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

void dedupe_in_order(std::vector<std::string>& v) {
    std::set<std::string> seen;
    std::vector<std::string> out;
    out.reserve(v.size());
    for (auto& s : v) {
        if (seen.insert(s).second) out.push_back(std::move(s));
    }
    v = std::move(out);
}

[[noreturn]] void line_error(std::string_view file, std::size_t line_no, const std::string& what) {
    std::ostringstream os;
    os << file << " line " << line_no << ": " << what;
    throw DataError(os.str());
}

std::string id_field(const json& obj, const char* key, std::string_view file, std::size_t line_no) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) line_error(file, line_no, std::string("missing field '") + key + "'");
    if (it->is_string()) {
        auto s = it->get<std::string>();
        if (s.empty()) line_error(file, line_no, std::string("empty field '") + key + "'");
        return s;
    }
    if (it->is_number_integer()) return std::to_string(it->get<long long>());
    line_error(file, line_no, std::string("field '") + key + "' must be a string id");
}

std::vector<std::string> string_array(const json& v, const char* key, std::string_view file,
                                      std::size_t line_no) {
    if (!v.is_array()) line_error(file, line_no, std::string("field '") + key + "' must be an array");
    std::vector<std::string> out;
    for (const auto& e : v) {
        if (!e.is_string()) line_error(file, line_no, std::string("field '") + key + "' must hold strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

const std::regex& rfc3339() {
    static const std::regex re(
        R"(^\d{4}-\d{2}-\d{2}[Tt ]\d{2}:\d{2}:\d{2}(\.\d+)?([Zz]|[+-]\d{2}:\d{2})$)");
    return re;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
    }
    return lines;
}

bool blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), is_space);
}

}  // namespace

std::string_view to_string(AnnotatedLabel label) {
    return label == AnnotatedLabel::Spammer ? "spammer" : "benign";
}

std::optional<std::string> normalize_phone(std::string_view raw) {
    std::size_t start = 0;
    while (start < raw.size() && is_space(raw[start])) ++start;
    std::string out;
    if (start < raw.size() && raw[start] == '+') out.push_back('+');
    std::size_t digits = 0;
    for (char c : raw.substr(start)) {
        if (c >= '0' && c <= '9') {
            out.push_back(c);
            ++digits;
        }
    }
    if (digits < 7) return std::nullopt;
    return out;
}

std::optional<std::string> normalize_url(std::string_view raw) {
    if (raw.empty()) return std::nullopt;
    if (std::any_of(raw.begin(), raw.end(), is_space)) return std::nullopt;
    const auto sep = raw.find("://");
    if (sep == std::string_view::npos || sep == 0) return std::nullopt;
    const auto scheme = raw.substr(0, sep);
    if (!std::isalpha(static_cast<unsigned char>(scheme[0]))) return std::nullopt;
    for (char c : scheme) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '.' && c != '-') {
            return std::nullopt;
        }
    }
    const auto rest = raw.substr(sep + 3);
    const auto auth_end = rest.find_first_of("/?#");
    const auto authority = rest.substr(0, auth_end);
    if (authority.empty()) return std::nullopt;
    for (char c : authority) {
        const auto uc = static_cast<unsigned char>(c);
        if (!std::isalnum(uc) && std::string_view("-._~:@[]%!$&'()*+,;=").find(c) == std::string_view::npos &&
            uc < 0x80) {
            return std::nullopt;
        }
    }
    std::string out = lower_ascii(scheme) + "://" + lower_ascii(authority);
    if (auth_end != std::string_view::npos) out.append(rest.substr(auth_end));
    // Trailing slashes only count when there is no query or fragment after them.
    const auto min_len = scheme.size() + 3 + authority.size();
    while (out.size() > min_len && out.back() == '/') out.pop_back();
    return out;
}

std::vector<std::string> extract_phones(std::string_view text) {
    static const std::regex re(R"(\+?\(?\d(?:[\d\-.() ]*\d)?)");
    std::vector<std::string> out;
    const std::string s(text);
    for (auto it = std::sregex_iterator(s.begin(), s.end(), re); it != std::sregex_iterator(); ++it) {
        if (auto p = normalize_phone(it->str())) out.push_back(*p);
    }
    dedupe_in_order(out);
    return out;
}

std::vector<std::string> extract_urls(std::string_view text) {
    static const std::regex re(R"([A-Za-z][A-Za-z0-9+.\-]*://[^\s]+)");
    std::vector<std::string> out;
    const std::string s(text);
    for (auto it = std::sregex_iterator(s.begin(), s.end(), re); it != std::sregex_iterator(); ++it) {
        std::string m = it->str();
        while (!m.empty() && std::string_view(".,;:!?)]}'\"").find(m.back()) != std::string_view::npos) {
            m.pop_back();
        }
        if (auto u = normalize_url(m)) out.push_back(*u);
    }
    dedupe_in_order(out);
    return out;
}

std::vector<std::string> extract_hashtags(std::string_view text) {
    static const std::regex re(R"(#(\w+))");
    std::vector<std::string> out;
    const std::string s(text);
    for (auto it = std::sregex_iterator(s.begin(), s.end(), re); it != std::sregex_iterator(); ++it) {
        out.push_back((*it)[1].str());
    }
    dedupe_in_order(out);
    return out;
}

TweetRecord parse_tweet_line(std::string_view line, std::size_t line_no) {
    constexpr std::string_view file = "tweets";
    json obj;
    try {
        obj = json::parse(line);
    } catch (const json::parse_error& e) {
        line_error(file, line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) line_error(file, line_no, "expected a JSON object");

    TweetRecord t;
    t.tweet_id = id_field(obj, "id", file, line_no);
    t.user_id = id_field(obj, "user_id", file, line_no);
    auto text = obj.find("text");
    if (text == obj.end() || !text->is_string()) line_error(file, line_no, "field 'text' must be a string");
    t.text = text->get<std::string>();
    auto created = obj.find("created_at");
    if (created == obj.end() || !created->is_string()) {
        line_error(file, line_no, "field 'created_at' must be a string");
    }
    t.created_at = created->get<std::string>();
    if (!std::regex_match(t.created_at, rfc3339())) {
        line_error(file, line_no, "created_at is not an RFC 3339 timestamp: " + t.created_at);
    }

    if (auto it = obj.find("phones"); it != obj.end() && !it->is_null()) {
        for (const auto& raw : string_array(*it, "phones", file, line_no)) {
            auto p = normalize_phone(raw);
            if (!p) line_error(file, line_no, "invalid phone token '" + raw + "'");
            t.phones.push_back(*p);
        }
        dedupe_in_order(t.phones);
    } else {
        t.phones = extract_phones(t.text);
    }
    if (t.phones.size() > 1) line_error(file, line_no, "multiple phones in tweet " + t.tweet_id);

    if (auto it = obj.find("urls"); it != obj.end() && !it->is_null()) {
        for (const auto& raw : string_array(*it, "urls", file, line_no)) {
            auto u = normalize_url(raw);
            if (!u) line_error(file, line_no, "invalid url token '" + raw + "'");
            t.urls.push_back(*u);
        }
        dedupe_in_order(t.urls);
    } else {
        t.urls = extract_urls(t.text);
    }

    if (auto it = obj.find("hashtags"); it != obj.end() && !it->is_null()) {
        t.hashtags = string_array(*it, "hashtags", file, line_no);
        dedupe_in_order(t.hashtags);
    } else {
        t.hashtags = extract_hashtags(t.text);
    }
    return t;
}

UserRecord parse_user_line(std::string_view line, std::size_t line_no) {
    constexpr std::string_view file = "users";
    json obj;
    try {
        obj = json::parse(line);
    } catch (const json::parse_error& e) {
        line_error(file, line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) line_error(file, line_no, "expected a JSON object");

    UserRecord u;
    u.user_id = id_field(obj, "user_id", file, line_no);
    auto count = [&](const char* key) -> long long {
        auto it = obj.find(key);
        if (it == obj.end() || it->is_null()) return 0;
        if (!it->is_number_integer() || it->get<long long>() < 0) {
            line_error(file, line_no, std::string("field '") + key + "' must be a nonnegative integer");
        }
        return it->get<long long>();
    };
    u.followers_count = count("followers_count");
    u.friends_count = count("friends_count");
    if (auto it = obj.find("suspended"); it != obj.end() && !it->is_null()) {
        if (!it->is_boolean()) line_error(file, line_no, "field 'suspended' must be a boolean");
        u.suspended = it->get<bool>();
    }
    if (auto it = obj.find("annotated_label"); it != obj.end() && !it->is_null()) {
        if (!it->is_string()) line_error(file, line_no, "field 'annotated_label' must be a string");
        const auto s = it->get<std::string>();
        if (s == "spammer") {
            u.annotated_label = AnnotatedLabel::Spammer;
        } else if (s == "benign") {
            u.annotated_label = AnnotatedLabel::Benign;
        } else {
            line_error(file, line_no, "annotated_label must be \"spammer\" or \"benign\"");
        }
    }
    return u;
}

std::string to_json_line(const TweetRecord& t) {
    json obj;
    obj["id"] = t.tweet_id;
    obj["user_id"] = t.user_id;
    obj["text"] = t.text;
    obj["created_at"] = t.created_at;
    obj["phones"] = t.phones;
    obj["urls"] = t.urls;
    obj["hashtags"] = t.hashtags;
    return obj.dump();
}

std::string to_json_line(const UserRecord& u) {
    json obj;
    obj["user_id"] = u.user_id;
    obj["followers_count"] = u.followers_count;
    obj["friends_count"] = u.friends_count;
    obj["suspended"] = u.suspended;
    if (u.annotated_label) obj["annotated_label"] = std::string(to_string(*u.annotated_label));
    return obj.dump();
}

Corpus::Corpus(std::vector<TweetRecord> tweets, std::vector<UserRecord> users,
               std::vector<FollowerEdge> edges)
    : tweets_(std::move(tweets)), users_(std::move(users)) {
    for (std::size_t i = 0; i < users_.size(); ++i) {
        if (!user_pos_.emplace(users_[i].user_id, i).second) {
            throw DataError("duplicate user_id " + users_[i].user_id);
        }
    }
    for (std::size_t i = 0; i < tweets_.size(); ++i) {
        auto& t = tweets_[i];
        if (!tweet_pos_.emplace(t.tweet_id, i).second) {
            throw DataError("duplicate tweet_id " + t.tweet_id);
        }
        dedupe_in_order(t.phones);
        dedupe_in_order(t.urls);
        dedupe_in_order(t.hashtags);
        if (t.phones.size() > 1) throw DataError("multiple phones in tweet " + t.tweet_id);
        if (!user_pos_.contains(t.user_id)) {
            warnings_.push_back("tweet " + t.tweet_id + " references unknown user " + t.user_id +
                                "; synthesized a zero-count user record");
            UserRecord u;
            u.user_id = t.user_id;
            user_pos_.emplace(u.user_id, users_.size());
            users_.push_back(std::move(u));
        }
        for (const auto& p : t.phones) phone_index_[p].push_back(i);
        for (const auto& u : t.urls) url_index_[u].push_back(i);
        user_index_[t.user_id].push_back(i);
    }

    std::set<FollowerEdge> seen;
    for (auto& e : edges) {
        if (e.follower == e.followee) {
            warnings_.push_back("dropped self-loop follower edge for " + e.follower);
            continue;
        }
        if (seen.insert(e).second) edges_.push_back(std::move(e));
    }
}

const TweetRecord& Corpus::tweet(std::string_view tweet_id) const {
    return tweets_[tweet_position(tweet_id)];
}

std::size_t Corpus::tweet_position(std::string_view tweet_id) const {
    auto it = tweet_pos_.find(std::string(tweet_id));
    if (it == tweet_pos_.end()) throw Error("unknown tweet " + std::string(tweet_id));
    return it->second;
}

const UserRecord* Corpus::find_user(std::string_view user_id) const {
    auto it = user_pos_.find(std::string(user_id));
    return it == user_pos_.end() ? nullptr : &users_[it->second];
}

const UserRecord& Corpus::user(std::string_view user_id) const {
    if (const auto* u = find_user(user_id)) return *u;
    throw Error("unknown user " + std::string(user_id));
}

const std::vector<std::size_t>& Corpus::tweets_of(std::string_view user_id) const {
    static const std::vector<std::size_t> none;
    auto it = user_index_.find(std::string(user_id));
    return it == user_index_.end() ? none : it->second;
}

void Corpus::validate() const {
    std::map<std::string, std::vector<std::size_t>> phones, urls, users;
    for (std::size_t i = 0; i < tweets_.size(); ++i) {
        const auto& t = tweets_[i];
        if (!find_user(t.user_id)) throw DataError("tweet " + t.tweet_id + " has no user record");
        if (t.phones.size() > 1) throw DataError("multiple phones in tweet " + t.tweet_id);
        for (const auto& p : t.phones) phones[p].push_back(i);
        for (const auto& u : t.urls) urls[u].push_back(i);
        users[t.user_id].push_back(i);
    }
    if (phones != phone_index_) throw DataError("phone index inconsistent with tweets");
    if (urls != url_index_) throw DataError("url index inconsistent with tweets");
    if (users != user_index_) throw DataError("user index inconsistent with tweets");
}

std::string Corpus::serialize() const {
    json doc;
    doc["tweets"] = json::array();
    for (const auto& t : tweets_) doc["tweets"].push_back(json::parse(to_json_line(t)));
    doc["users"] = json::array();
    for (const auto& u : users_) doc["users"].push_back(json::parse(to_json_line(u)));
    doc["edges"] = json::array();
    for (const auto& e : edges_) doc["edges"].push_back({e.follower, e.followee});
    auto dump_index = [](const std::map<std::string, std::vector<std::size_t>>& idx) {
        json j = json::object();
        for (const auto& [k, v] : idx) j[k] = v;
        return j;
    };
    doc["phone_index"] = dump_index(phone_index_);
    doc["url_index"] = dump_index(url_index_);
    doc["user_index"] = dump_index(user_index_);
    doc["warnings"] = warnings_;
    return doc.dump();
}

Corpus load_corpus(const std::filesystem::path& tweets_path, const std::filesystem::path& users_path,
                   const std::optional<std::filesystem::path>& edges_path) {
    std::vector<TweetRecord> tweets;
    {
        const auto lines = read_lines(tweets_path);
        std::set<std::string> ids;
        for (std::size_t i = 0; i < lines.size(); ++i) {
            if (blank(lines[i])) continue;
            auto t = parse_tweet_line(lines[i], i + 1);
            if (!ids.insert(t.tweet_id).second) {
                line_error("tweets", i + 1, "duplicate tweet_id " + t.tweet_id);
            }
            tweets.push_back(std::move(t));
        }
    }
    std::vector<UserRecord> users;
    {
        const auto lines = read_lines(users_path);
        std::set<std::string> ids;
        for (std::size_t i = 0; i < lines.size(); ++i) {
            if (blank(lines[i])) continue;
            auto u = parse_user_line(lines[i], i + 1);
            if (!ids.insert(u.user_id).second) {
                line_error("users", i + 1, "duplicate user_id " + u.user_id);
            }
            users.push_back(std::move(u));
        }
    }
    std::vector<FollowerEdge> edges;
    if (edges_path) {
        const auto lines = read_lines(*edges_path);
        if (lines.empty() || lines[0] != "follower,followee") {
            throw DataError("edges line 1: expected header \"follower,followee\"");
        }
        for (std::size_t i = 1; i < lines.size(); ++i) {
            if (blank(lines[i])) continue;
            const auto comma = lines[i].find(',');
            if (comma == std::string::npos || lines[i].find(',', comma + 1) != std::string::npos) {
                line_error("edges", i + 1, "expected two comma-separated user ids");
            }
            FollowerEdge e{lines[i].substr(0, comma), lines[i].substr(comma + 1)};
            if (e.follower.empty() || e.followee.empty()) line_error("edges", i + 1, "empty user id");
            edges.push_back(std::move(e));
        }
    }
    Corpus corpus(std::move(tweets), std::move(users), std::move(edges));
    corpus.validate();
    return corpus;
}

}  // namespace spamnet
