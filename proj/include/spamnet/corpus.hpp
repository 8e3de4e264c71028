// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace spamnet {

enum class AnnotatedLabel { Spammer, Benign };

struct TweetRecord {
    std::string tweet_id;
    std::string user_id;
    std::string text;
    std::string created_at;  // RFC 3339
    std::vector<std::string> phones;  // at most one, normalized
    std::vector<std::string> urls;    // normalized, deduplicated
    std::vector<std::string> hashtags;
};

struct UserRecord {
    std::string user_id;
    long long followers_count = 0;
    long long friends_count = 0;
    bool suspended = false;
    std::optional<AnnotatedLabel> annotated_label;
};

struct FollowerEdge {
    std::string follower;
    std::string followee;

    auto operator<=>(const FollowerEdge&) const = default;
};

/// Immutable, indexed tweet/user corpus.
///
/// Tweets keep file order. Index maps are ordered so that iteration over
/// phones, URLs, and users is deterministic.
class Corpus {
public:
    Corpus() = default;
    Corpus(std::vector<TweetRecord> tweets, std::vector<UserRecord> users,
           std::vector<FollowerEdge> edges);

    const std::vector<TweetRecord>& tweets() const { return tweets_; }
    const std::vector<UserRecord>& users() const { return users_; }
    const std::vector<FollowerEdge>& follower_edges() const { return edges_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    /// Tweet positions per normalized phone token.
    const std::map<std::string, std::vector<std::size_t>>& phone_index() const { return phone_index_; }
    const std::map<std::string, std::vector<std::size_t>>& url_index() const { return url_index_; }
    const std::map<std::string, std::vector<std::size_t>>& user_index() const { return user_index_; }

    const TweetRecord& tweet(std::string_view tweet_id) const;
    std::size_t tweet_position(std::string_view tweet_id) const;
    const UserRecord* find_user(std::string_view user_id) const;
    const UserRecord& user(std::string_view user_id) const;
    /// Positions of a user's tweets; empty for users without tweets.
    const std::vector<std::size_t>& tweets_of(std::string_view user_id) const;

    /// Throws DataError when any index disagrees with the tweet list.
    void validate() const;

    /// Canonical JSON serialization, used to check load determinism.
    std::string serialize() const;

private:
    std::vector<TweetRecord> tweets_;
    std::vector<UserRecord> users_;
    std::vector<FollowerEdge> edges_;
    std::vector<std::string> warnings_;
    std::unordered_map<std::string, std::size_t> tweet_pos_;
    std::unordered_map<std::string, std::size_t> user_pos_;
    std::map<std::string, std::vector<std::size_t>> phone_index_;
    std::map<std::string, std::vector<std::size_t>> url_index_;
    std::map<std::string, std::vector<std::size_t>> user_index_;
};

/// Strips everything except digits and a leading '+'. Rejects tokens with
/// fewer than 7 digits.
std::optional<std::string> normalize_phone(std::string_view raw);

/// Lowercases scheme and host, strips trailing slashes, keeps path and query.
std::optional<std::string> normalize_url(std::string_view raw);

/// Text extraction used when a tweet carries no precomputed token fields.
/// Phones: runs of at least 7 digits with optional separators ( -.() and
/// spaces) and an optional leading '+'. URLs: scheme://non-space spans with
/// trailing punctuation removed. Hashtags: '#' followed by word characters.
std::vector<std::string> extract_phones(std::string_view text);
std::vector<std::string> extract_urls(std::string_view text);
std::vector<std::string> extract_hashtags(std::string_view text);

/// Parses one tweets.jsonl object. `line_no` is used in error messages.
TweetRecord parse_tweet_line(std::string_view line, std::size_t line_no);
UserRecord parse_user_line(std::string_view line, std::size_t line_no);

std::string to_json_line(const TweetRecord& t);
std::string to_json_line(const UserRecord& u);

Corpus load_corpus(const std::filesystem::path& tweets_path,
                   const std::filesystem::path& users_path,
                   const std::optional<std::filesystem::path>& edges_path = std::nullopt);

std::string_view to_string(AnnotatedLabel label);

}  // namespace spamnet
