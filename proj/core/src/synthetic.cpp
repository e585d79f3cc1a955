// Copyright 2026 The demoee Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "demoee/corpus.hpp"
#include "demoee/util.hpp"

namespace demoee {

namespace {

// Trigger words for the ACE 2005 event subtypes. Every word is unique across
// types and never collides with a filler or a connector token.
const std::map<std::string, std::vector<std::string>>& trigger_lexicon() {
  static const std::map<std::string, std::vector<std::string>> lex = {
      {"Be-Born", {"born", "birth", "delivered"}},
      {"Marry", {"married", "wed", "wedding"}},
      {"Divorce", {"divorced", "divorce", "separated"}},
      {"Injure", {"injured", "wounded", "hurt"}},
      {"Die", {"died", "killed", "perished"}},
      {"Transport", {"arrived", "traveled", "moved", "shipped"}},
      {"Transfer-Ownership", {"bought", "sold", "acquired"}},
      {"Transfer-Money", {"paid", "donated", "loaned"}},
      {"Start-Org", {"founded", "established", "formed"}},
      {"Merge-Org", {"merged", "merger", "combined"}},
      {"Declare-Bankruptcy", {"bankrupt", "bankruptcy", "insolvent"}},
      {"End-Org", {"dissolved", "closed", "shut"}},
      {"Attack", {"attacked", "bombed", "struck", "fired"}},
      {"Demonstrate", {"protested", "rallied", "marched"}},
      {"Meet", {"met", "meeting", "summit", "talks"}},
      {"Phone-Write", {"called", "wrote", "emailed"}},
      {"Start-Position", {"hired", "appointed", "recruited"}},
      {"End-Position", {"resigned", "retired", "dismissed"}},
      {"Nominate", {"nominated", "nominee", "proposed"}},
      {"Elect", {"elected", "voted", "reelected"}},
      {"Arrest-Jail", {"arrested", "jailed", "detained"}},
      {"Release-Parole", {"released", "freed", "paroled"}},
      {"Trial-Hearing", {"trial", "hearing", "tried"}},
      {"Charge-Indict", {"charged", "indicted", "indictment"}},
      {"Sue", {"sued", "lawsuit", "suing"}},
      {"Convict", {"convicted", "guilty", "conviction"}},
      {"Sentence", {"sentenced", "sentence", "term"}},
      {"Fine", {"fined", "fine", "penalty"}},
      {"Execute", {"executed", "execution", "hanged"}},
      {"Extradite", {"extradited", "extradition", "deported"}},
      {"Acquit", {"acquitted", "acquittal", "cleared"}},
      {"Appeal", {"appealed", "appeal", "challenged"}},
      {"Pardon", {"pardoned", "pardon", "clemency"}},
  };
  return lex;
}

const std::vector<std::string> kPersons = {
    "Kelly",   "Yoon",   "Smith",    "Garcia",   "Tanaka",  "Novak",   "Okafor",    "Schmidt",
    "Rossi",   "Dubois", "Ivanov",   "Kowalski", "Haddad",  "Mensah",  "Lindqvist", "Moreau",
    "Petrov",  "Santos", "Nakamura", "Fischer",  "Alvarez", "Brennan", "Chen",      "Dimitrov",
    "Eriksen", "Farouk", "Gupta",    "Horvath",  "Ibrahim", "Jensen",  "Kim",       "Larsen",
    "Mbeki",   "Nolan",  "Ortiz",    "Park",     "Quinn",   "Reyes",   "Suzuki",    "Turner",
    "Usman",   "Varga",  "Weber",    "Xu",       "Yilmaz",  "Zhang"};
const std::vector<std::string> kPlaces = {
    "Beijing", "Seoul",    "Paris",     "Baghdad",      "Cairo",    "Lagos",    "Moscow", "Berlin",
    "Madrid",  "Lima",     "Nairobi",   "Jakarta",      "Manila",   "Dhaka",    "Ankara", "Tehran",
    "Kabul",   "Hanoi",    "Oslo",      "Warsaw",       "Vienna",   "Athens",   "Dublin", "Havana",
    "Quito",   "New York", "Hong Kong", "Buenos Aires", "Tel Aviv", "Cape Town"};
const std::vector<std::string> kOrgs = {"Reuters",    "Microsoft",    "NATO",        "UNICEF",
                                        "the army",   "the ministry", "the council", "the union",
                                        "the court",  "Acme Corp",    "Globex",      "Initech",
                                        "the rebels", "the police",   "the senate",  "Interpol"};
const std::vector<std::string> kVehicles = {"train", "plane", "ship",       "truck",
                                            "bus",   "ferry", "helicopter", "convoy"};
const std::vector<std::string> kWeapons = {"rifle",   "missile",   "knife", "bomb",
                                           "grenade", "artillery", "drone", "tank"};
const std::vector<std::string> kObjects = {"cargo",     "shares",   "equipment", "supplies",
                                           "documents", "property", "stock",     "land"};

enum Pool : unsigned {
  kPerson = 1,
  kPlace = 2,
  kOrg = 4,
  kVehicle = 8,
  kWeapon = 16,
  kObject = 32,
};

struct RoleStyle {
  unsigned pools;
  std::string connector;
};

RoleStyle role_style(const std::string& role) {
  static const std::map<std::string, RoleStyle> styles = {
      {"Person", {kPerson, "concerning"}},
      {"Place", {kPlace, "in"}},
      {"Agent", {kPerson | kOrg, "led by"}},
      {"Victim", {kPerson, "harming"}},
      {"Instrument", {kWeapon, "with"}},
      {"Artifact", {kPerson | kObject, "carrying"}},
      {"Vehicle", {kVehicle, "by"}},
      {"Origin", {kPlace, "from"}},
      {"Destination", {kPlace, "to"}},
      {"Buyer", {kPerson | kOrg, "bought by"}},
      {"Seller", {kPerson | kOrg, "sold by"}},
      {"Beneficiary", {kPerson | kOrg, "for"}},
      {"Giver", {kPerson | kOrg, "given by"}},
      {"Recipient", {kPerson | kOrg, "received by"}},
      {"Org", {kOrg, "of"}},
      {"Attacker", {kPerson | kOrg, "launched by"}},
      {"Target", {kPerson | kPlace | kOrg, "against"}},
      {"Entity", {kPerson | kOrg, "joined by"}},
      {"Defendant", {kPerson, "accusing"}},
      {"Prosecutor", {kPerson | kOrg, "pressed by"}},
      {"Adjudicator", {kPerson | kOrg, "before"}},
      {"Plaintiff", {kPerson | kOrg, "filed by"}},
  };
  auto it = styles.find(role);
  if (it != styles.end()) return it->second;
  std::string lower;
  for (char c : role) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return {kPerson | kOrg | kObject, "as " + lower};
}

std::vector<std::string> triggers_for(const std::string& type) {
  const auto& lex = trigger_lexicon();
  auto it = lex.find(type);
  if (it != lex.end()) return it->second;
  std::string stem;
  for (char c : type)
    if (std::isalnum(static_cast<unsigned char>(c)))
      stem += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (stem.empty()) stem = "event";
  return {stem + "ed", stem + "ing", stem + "s"};
}

const std::vector<std::string>& pool_words(unsigned pool) {
  switch (pool) {
    case kPerson:
      return kPersons;
    case kPlace:
      return kPlaces;
    case kOrg:
      return kOrgs;
    case kVehicle:
      return kVehicles;
    case kWeapon:
      return kWeapons;
    default:
      return kObjects;
  }
}

const std::vector<std::vector<std::string>> kLeads = {
    {}, {}, {"Yesterday", ","}, {"On", "Monday", ","}, {"Reportedly", ","}, {"Earlier", ","}};

// Event-free sentences; {P} person, {L} place, {O} organisation.
const std::vector<std::string> kFillers = {
    "{P} said the weather in {L} remained mild .",
    "Officials in {L} declined to comment on the report .",
    "{O} published its annual figures on Monday .",
    "The markets in {L} stayed calm throughout the week .",
    "{P} enjoyed a quiet holiday near {L} .",
    "Analysts expect {O} to review its budget .",
    "{P} and {O} discussed the football results .",
    "Traffic around {L} was lighter than usual .",
};

class SentenceBuilder {
 public:
  SentenceBuilder(const EventSchema& schema, const SynthOptions& options, Rng& rng)
      : schema_(schema), options_(options), rng_(rng) {}

  AnnotatedExample build(std::string id) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      AnnotatedExample ex = attempt_build(id);
      if (mentions_unique(ex)) return ex;
    }
    // Degenerate schemas can make collisions unavoidable; fall back to an
    // event-free sentence, which is always well formed.
    return filler(std::move(id));
  }

 private:
  AnnotatedExample attempt_build(const std::string& id) {
    used_.clear();
    if (schema_.empty() || !bernoulli(rng_, options_.event_rate)) return filler(id);

    std::size_t n_events = 1;
    if (options_.max_events > 1 && schema_.size() > 1 && bernoulli(rng_, 0.3))
      n_events = std::min<std::size_t>(options_.max_events, 2);
    auto types = sample_without_replacement(rng_, schema_.size(), n_events);

    AnnotatedExample ex{id, {}, {}};
    const auto& lead = kLeads[uniform_index(rng_, kLeads.size())];
    ex.tokens.insert(ex.tokens.end(), lead.begin(), lead.end());
    for (std::size_t e = 0; e < types.size(); ++e) {
      if (e > 0) {
        ex.tokens.push_back(",");
        ex.tokens.push_back("and");
      }
      append_clause(ex, schema_.type(types[e]));
    }
    ex.tokens.push_back(".");
    return ex;
  }

  void append_clause(AnnotatedExample& ex, const EventTypeDef& def) {
    EventRecord record;
    record.event_type = def.name;

    std::vector<std::size_t> filled;
    for (std::size_t j = 0; j < def.roles.size(); ++j)
      if (bernoulli(rng_, options_.role_fill_rate)) filled.push_back(j);

    auto add_values = [&](std::size_t role_index) {
      const auto& role = def.roles[role_index];
      RoleStyle style = role_style(role);
      std::size_t count = 1;
      if ((style.pools & kPerson) && bernoulli(rng_, options_.multi_argument_rate)) count = 2;
      for (std::size_t c = 0; c < count; ++c) {
        if (c > 0) ex.tokens.push_back("and");
        auto words = split_whitespace(pick_filler(style.pools));
        std::size_t start = ex.tokens.size();
        ex.tokens.insert(ex.tokens.end(), words.begin(), words.end());
        record.arguments.push_back({role, make_span(ex.tokens, start, ex.tokens.size())});
      }
    };

    bool subject = !filled.empty() && filled.front() == 0;
    if (subject) add_values(0);

    auto triggers = triggers_for(def.name);
    std::string trig = triggers[uniform_index(rng_, triggers.size())];
    std::size_t tstart = ex.tokens.size();
    ex.tokens.push_back(trig);
    record.trigger = make_span(ex.tokens, tstart, tstart + 1);

    std::vector<std::size_t> rest(filled.begin() + (subject ? 1 : 0), filled.end());
    shuffle(rest, rng_);
    for (auto j : rest) {
      auto conn = split_whitespace(role_style(def.roles[j]).connector);
      ex.tokens.insert(ex.tokens.end(), conn.begin(), conn.end());
      add_values(j);
    }
    ex.records.push_back(std::move(record));
  }

  std::string pick_filler(unsigned pools) {
    std::vector<unsigned> options;
    for (unsigned p = 1; p <= kObject; p <<= 1)
      if (pools & p) options.push_back(p);
    const auto& words = pool_words(options[uniform_index(rng_, options.size())]);
    for (int tries = 0; tries < 32; ++tries) {
      const auto& w = words[uniform_index(rng_, words.size())];
      if (used_.insert(w).second) return w;
    }
    return words[uniform_index(rng_, words.size())];
  }

  AnnotatedExample filler(std::string id) {
    used_.clear();
    const std::string& tmpl = kFillers[uniform_index(rng_, kFillers.size())];
    AnnotatedExample ex{std::move(id), {}, {}};
    for (const auto& tok : split_whitespace(tmpl)) {
      std::string word;
      if (tok == "{P}")
        word = pick_filler(kPerson);
      else if (tok == "{L}")
        word = pick_filler(kPlace);
      else if (tok == "{O}")
        word = pick_filler(kOrg);
      else
        word = tok;
      for (auto& w : split_whitespace(word)) ex.tokens.push_back(w);
    }
    return ex;
  }

  static bool mentions_unique(const AnnotatedExample& ex) {
    auto once = [&](const Span& s) {
      auto needle = split_whitespace(s.text);
      return find_token_runs(ex.tokens, needle).size() == 1;
    };
    for (const auto& r : ex.records) {
      if (!once(r.trigger)) return false;
      for (const auto& a : r.arguments)
        if (!once(a.span)) return false;
    }
    return true;
  }

  const EventSchema& schema_;
  const SynthOptions& options_;
  Rng& rng_;
  std::set<std::string> used_;
};

}  // namespace

Corpus generate_synthetic(const EventSchema& schema, std::size_t n, uint64_t seed,
                          const SynthOptions& options) {
  Rng rng = make_rng(seed, "synthetic");
  SentenceBuilder builder(schema, options, rng);
  Corpus corpus{schema, {}};
  corpus.examples.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    corpus.examples.push_back(
        builder.build("syn" + std::to_string(seed) + "-" + std::to_string(i)));
  return corpus;
}

}  // namespace demoee
