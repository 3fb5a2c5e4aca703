"""Generate the fixture corpus shipped under data/.

Produces a 130-case catalog (63 good / 35 bad / 25 neutral / 7 blocker),
the curated 24-cluster file (67 standalone cases), a synthetic annotation
export whose approved excerpts average exactly 32.26 words, a 150-segment
policy document and its 285-pair gold tag file. Deterministic: rerunning
rewrites byte-identical files.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "data"

# (title, rating) per cluster member; two, three or four contrasting variants.
CLUSTERS = [
    [("Your personal data is not sold to third parties", "good"),
     ("Your personal data is sold unless you opt out", "bad")],
    [("You can delete your content from the service at any time", "good"),
     ("You cannot delete your content from the service", "bad")],
    [("The service only uses cookies that are strictly necessary", "good"),
     ("Tracking cookies follow you across other websites", "bad")],
    [("Precise location data is collected only while the app is in use", "good"),
     ("Your precise location is collected even when the app is closed", "bad")],
    [("Users are notified before policy changes take effect", "good"),
     ("The policy can change at any time without notice", "bad")],
    [("Your messages are protected with end-to-end encryption", "good"),
     ("The service can read your private messages", "bad")],
    [("You can request complete deletion of your account data", "good"),
     ("Account data is retained indefinitely after deletion requests", "bad")],
    [("Advertising is shown without building a behavioral profile", "good"),
     ("A behavioral advertising profile is built from your activity", "bad")],
    [("Users are promptly informed about data breaches", "good"),
     ("The service is not obligated to inform you about data breaches", "bad")],
    [("Data is shared with third parties only in anonymized form", "good"),
     ("Identifiable data is shared with commercial partners", "bad")],
    [("Explicit consent is requested before processing sensitive data", "good"),
     ("Sensitive data is processed without explicit consent", "bad")],
    [("You can export your data in a machine-readable format", "good"),
     ("There is no way to export the data you provided", "bad")],
    [("Data is deleted within 30 days after account closure", "good"),
     ("Backups keep your data for years after you leave", "bad"),
     ("Retention periods are decided case by case", "neutral")],
    [("Legal requests for user data are published in a transparency report", "good"),
     ("User data is handed to authorities without a warrant", "bad"),
     ("Government requests are honored where the law requires", "neutral")],
    [("The content of your emails is never analyzed", "good"),
     ("Emails are scanned to target advertising", "bad"),
     ("Automated filters scan messages for abuse detection", "neutral")],
    [("Biometric identifiers are never collected", "good"),
     ("Facial recognition templates are stored remotely", "bad"),
     ("Biometric checks run only on your device", "neutral")],
    [("No data is knowingly collected from children", "good"),
     ("Child accounts are profiled like any other account", "bad"),
     ("Parental controls decide what children's data is stored", "neutral")],
    [("Deleted posts disappear from public archives immediately", "good"),
     ("Deleted posts remain visible in cached archives", "bad"),
     ("Archived copies are kept for moderation review", "neutral")],
    [("Your identity is not linked across unrelated services", "good"),
     ("Accounts are matched with data brokers' records", "bad"),
     ("Linked accounts share a single sign-on profile", "neutral")],
    [("Voice recordings stay on the device", "good"),
     ("Voice recordings are reviewed by human contractors", "bad"),
     ("Voice snippets train models after anonymization", "neutral")],
    [("Usage analytics are collected in aggregate only", "good"),
     ("Every click is recorded with your identity attached", "bad"),
     ("Analytics can be disabled in the settings", "neutral")],
    [("The service never shares your contact list", "good"),
     ("Your contact list is uploaded by default", "bad"),
     ("Contacts are uploaded only after a prompt", "neutral"),
     ("Your address book is sold to data brokers", "blocker")],
    [("You keep full ownership of the content you post", "good"),
     ("The service gets a broad license to reuse your content", "bad"),
     ("Reuse of content is limited to operating the service", "neutral"),
     ("You waive all moral rights to everything you upload", "blocker")],
    [("You can take disputes to the courts of your residence", "good"),
     ("Disputes must go through the company's chosen arbitrator", "bad"),
     ("Arbitration applies only after mediation fails", "neutral"),
     ("You waive the right to join any class action lawsuit", "blocker")],
]

STANDALONE = (
    [(t, "good") for t in [
        "Two-factor authentication is available for all accounts",
        "Security practices are audited by independent reviewers every year",
        "The service honors the Do Not Track browser setting",
        "The policy is summarized in plain, accessible language",
        "Only the data strictly needed to run the service is collected",
        "Data is stored on servers in your own jurisdiction",
        "You are informed about how long sessions stay signed in",
        "Suspension decisions can be appealed to a human reviewer",
        "The source code of the client is publicly available",
        "Payment details are handled by the processor and never stored",
        "You can browse most of the service without an account",
        "Crash reports are opt-in and scrubbed of identifiers",
        "A dedicated privacy contact answers questions within days",
        "Third-party processors are listed publicly with their roles",
        "Pseudonyms are allowed and no real-name requirement exists",
        "Account recovery never asks for government identification",
        "Notification emails can be disabled individually",
        "The service promises never to run fingerprinting scripts",
        "Old accounts are warned before scheduled deactivation",
        "Your calendar entries are never used for advertising",
        "Search queries are anonymized within 24 hours",
        "Support conversations are deleted after the case closes",
        "The service publishes the retention schedule for every data type",
        "You can opt out of product research experiments",
        "Profile visibility defaults to private for new accounts",
        "Exported archives include every category of stored data",
        "Contractors sign confidentiality agreements covering user data",
        "A bug bounty program rewards responsible disclosure",
        "Cookies expire at the end of every browser session",
        "Your files are scanned for viruses but never indexed for ads",
        "The mobile app works with all tracking permissions denied",
        "Marketing messages require a separate explicit subscription",
        "Internal access to user records is logged and reviewed",
        "Aggregated statistics are the only data shared with researchers",
        "Deleting the app triggers a reminder on how to delete the account",
        "The service commits to a 90-day notice before shutting down",
        "Password rules follow modern guidance and allow managers",
        "Data requests from users are answered free of charge",
        "Accessibility settings are stored locally on your device",
    ]]
    + [(t, "bad") for t in [
        "Usage data is shared with an analytics company headquartered abroad",
        "The inactivity policy deletes accounts without a final warning",
        "Dark patterns push you toward the most permissive settings",
        "Support staff can read your files without notifying you",
        "The service reserves the right to sell assets including user data",
        "Refusing the new terms locks you out of your existing data",
        "Advertising identifiers are reset only on request",
        "Your public posts are used to train recommendation systems",
        "Inactive accounts keep receiving marketing indefinitely",
        "The service embeds social media widgets that report your visit",
        "Device fingerprints supplement cookies when you block them",
    ]]
    + [(t, "neutral") for t in [
        "The service stores which notifications you have dismissed",
        "IP addresses are logged for security for up to 90 days",
        "Some features require granting the camera permission",
        "Surveys are occasionally shown to a sample of users",
        "Beta features may collect extra diagnostics while enrolled",
        "Receipts are kept as long as tax law requires",
        "The spam filter inspects message metadata",
        "Language preferences are inferred from your browser",
        "Employers on team plans can see workspace activity",
        "Public profiles are indexed by search engines",
        "Promotional discounts depend on your subscription history",
        "The help center uses a third-party chat widget",
        "Usage quotas are enforced per account and per device",
    ]]
    + [(t, "blocker") for t in [
        "The service claims perpetual rights over deleted content",
        "The terms allow reading private messages for marketing purposes",
        "Biometric data is shared with law enforcement without due process",
        "Continued use signs you up for binding future terms of any kind",
    ]]
)

SERVICES = [
    "streamly", "mapquill", "shoply", "chatterbox", "notekeep", "fitpulse",
    "cloudnest", "photopile", "ridehail", "bookmarkly", "newsreel", "gamehive",
    "musicbay", "travelkit", "fooddash", "homecam", "walletwise", "jobboard",
    "petmatch", "learnloop", "weatherly", "taskforge", "mailhaven", "videoden",
    "socialite", "marketeer", "healthhub", "codecraft", "eventful", "datavault",
    "paperrail", "shopmates", "streambeam", "quicknote", "farewell", "brightkey",
    "loopmail", "citypass", "gardenly", "snapstash",
]

LEADINS = [
    "The policy explains that",
    "According to the terms,",
    "The document states that",
    "Under the heading on data handling, the company notes that",
    "In its privacy statement the provider declares that",
    "The agreement specifies that",
    "As described in the data practices section,",
    "The provider makes clear that",
]

FILLERS = [
    "and this applies to every account regardless of region or subscription level",
    "which the company says reflects feedback gathered from its user community",
    "subject to the exceptions described elsewhere in the same document",
    "and the section goes on to describe how requests are handled in practice",
    "while reminding readers that separate rules govern enterprise customers",
    "a commitment the company repeats in its frequently asked questions",
    "although the summary at the top of the page words this more loosely",
    "and users are directed to the settings page for the relevant controls",
    "with further detail available from the support team on request",
    "as part of the broader description of how the product operates",
]

SECOND_SENTENCES = [
    "The same section points readers to a form for submitting questions.",
    "A table beneath the paragraph lists the affected data categories.",
    "The wording was last revised together with the spring update.",
    "Readers are referred to the glossary for the defined terms.",
    "An example in the margin illustrates how this works for a typical account.",
    "The clause applies equally to the mobile and desktop versions.",
    "A footnote clarifies that regional law can override this default.",
    "The help center repeats this commitment in shorter words.",
    "The paragraph closes by naming the team responsible for compliance.",
    "A link leads to the dashboard where the setting can be changed.",
]

TAIL_PHRASES = [
    "for every account tier",
    "across all supported regions",
    "without any extra charge",
    "by default",
    "from day one",
    "in plain terms",
    "worldwide",
    "explicitly",
    "today",
]

TARGET_MEAN_WORDS = 32.26


def build_cases() -> tuple[list[dict], list[dict]]:
    cases, clusters = [], []
    counter = 0
    for i, members in enumerate(CLUSTERS, start=1):
        member_ids = []
        for title, rating in members:
            counter += 1
            case_id = f"c{counter:03d}"
            cases.append({"id": case_id, "title": title, "rating": rating})
            member_ids.append(case_id)
        clusters.append({"cluster_id": f"k{i:02d}", "case_ids": member_ids})
    for title, rating in STANDALONE:
        counter += 1
        cases.append({"id": f"c{counter:03d}", "title": title, "rating": rating})
    hist = {}
    for case in cases:
        hist[case["rating"]] = hist.get(case["rating"], 0) + 1
    assert len(cases) == 130, len(cases)
    assert hist == {"good": 63, "bad": 35, "neutral": 25, "blocker": 7}, hist
    assert len(clusters) == 24
    assert 130 - sum(len(c["case_ids"]) for c in clusters) == 67
    return cases, clusters


def build_annotations(cases: list[dict]) -> list[dict]:
    rng = random.Random(20240731)
    counts = [rng.randint(2, 8) for _ in cases]
    while sum(counts) != 650:
        i = rng.randrange(len(counts))
        if sum(counts) < 650 and counts[i] < 8:
            counts[i] += 1
        elif sum(counts) > 650 and counts[i] > 2:
            counts[i] -= 1

    records, seen = [], set()
    for case, k in zip(cases, counts):
        clause = case["title"][0].lower() + case["title"][1:]
        for _ in range(k):
            service = rng.choice(SERVICES)
            lead = rng.choice(LEADINS)
            filler = rng.choice(FILLERS)
            text = f"{lead} {clause}, {filler}."
            if rng.random() < 0.35:
                text += f" {rng.choice(SECOND_SENTENCES)}"
            while (service, " ".join(text.split())) in seen:
                text += f" {rng.choice(SECOND_SENTENCES)}"
            seen.add((service, " ".join(text.split())))
            records.append(
                {"case_id": case["id"], "service_id": service, "excerpt": text,
                 "approved": True}
            )

    # nudge the total word count onto the exact target mean with short,
    # naturally-phrased tails appended to rng-chosen records
    total_words = sum(len(r["excerpt"].split()) for r in records)
    target_total = round(TARGET_MEAN_WORDS * len(records))
    assert abs(target_total - TARGET_MEAN_WORDS * len(records)) < 1e-9
    assert total_words < target_total, "base generation must undershoot the target"
    while total_words < target_total:
        deficit = target_total - total_words
        candidates = [p for p in TAIL_PHRASES if len(p.split()) <= deficit]
        phrase = rng.choice(candidates)
        record = records[rng.randrange(len(records))]
        record["excerpt"] = record["excerpt"].rstrip(".") + f", {phrase}."
        total_words += len(phrase.split())
    assert total_words == target_total
    unique = {(r["service_id"], " ".join(r["excerpt"].split())) for r in records}
    assert len(unique) == len(records), "tail padding collided two excerpts"

    # a few rejected records, excluded from all downstream statistics
    for j in range(15):
        case = cases[(j * 9) % len(cases)]
        records.append(
            {
                "case_id": case["id"],
                "service_id": SERVICES[j % len(SERVICES)],
                "excerpt": f"A moderator rejected this proposed match number {j} "
                "because the quoted sentence does not support the case title.",
                "approved": False,
            }
        )
    return records


POLICY_SECTIONS = [
    ("INTRODUCTION", [
        "This privacy policy describes how we collect, use, share, and protect information about you when you use our platform, websites, applications, and related services.",
        "We update this policy from time to time and will notify you of material changes before they take effect through email or an in-product notice.",
        "By using the platform you acknowledge the practices described here; where consent is legally required we will ask for it separately and record your choice.",
    ]),
    ("INFORMATION WE COLLECT", [
        "Account information. When you create an account we collect your name, email address, phone number, date of birth, and payment details where a booking requires them.",
        "Profile information. You may choose to add a photo, a short biography, preferred language, and emergency contact details to your profile.",
        "Identity verification. In some jurisdictions we collect a government identification document and compare it with a selfie to verify who you are.",
        "Listing information. Hosts provide the address, photos, calendar availability, and amenity details of the places they offer.",
        "Payment information. Our payments processor collects card numbers, bank account details, and transaction history needed to move money between guests and hosts.",
        "Communications. We store messages you exchange with other members and with our support team, together with metadata about those conversations.",
        "Usage information. We log the pages you view, searches you run, bookings you make, and the dates and times of those interactions.",
        "Device information. We collect hardware model, operating system, IP address, crash data, and unique identifiers from the devices you use.",
        "Location information. With your permission we collect precise location from your device; otherwise we infer an approximate location from your IP address.",
        "Cookies and similar technologies collect information about your browsing session as described in our cookie statement.",
        "Third-party sources. We receive information from background check providers, payment partners, and social services you choose to link.",
    ]),
    ("HOW WE USE INFORMATION", [
        "We use your information to operate the marketplace, including processing bookings, collecting payments, and sending confirmations.",
        "We personalize search results and recommendations based on your past activity, saved preferences, and similar members' behavior.",
        "We use information to detect and prevent fraud, spam, abuse, security incidents, and other harmful activity.",
        "We conduct research and analysis, including machine learning, to improve the products and build new features.",
        "With your separate consent where required, we send you promotional messages, marketing, advertising, and other information that may interest you.",
        "We use information to comply with our legal obligations, resolve disputes, and enforce our agreements.",
        "Aggregated or de-identified information that can no longer identify you may be used for any purpose.",
    ]),
]


def build_policy() -> tuple[str, list[str]]:
    """Compose a 150-segment policy: titles, paragraphs, list items."""
    lines: list[str] = []
    for title, paragraphs in POLICY_SECTIONS:
        lines.append(title)
        lines.extend(paragraphs)

    lines.append("WHEN WE SHARE INFORMATION")
    sharing = [
        "Sharing between guests and hosts. When you request a booking we share the information the other party needs to evaluate and fulfil it, such as your first name, photo, and stay dates.",
        "Service providers. We share information with vendors who provide hosting, analytics, customer support, identity verification, and payment services on our behalf.",
        "Your personal data is not sold to third parties, and we do not share member information with advertising networks in identifiable form.",
        "Corporate affiliates. We share information within our corporate family to provide an integrated experience and for the purposes described in this policy.",
        "Legal requests. We disclose information to courts, law enforcement, and governmental authorities where we are legally required to do so, and we publish the volume of such requests in a transparency report each year.",
        "Business transfers. If we are involved in a merger, acquisition, or sale of assets, your information may be transferred as part of that transaction with notice to you.",
        "With your consent. We share information in other circumstances where you direct us to or give consent.",
    ]
    lines.extend(sharing)

    lines.append("COOKIES AND TRACKING")
    lines.extend([
        "We and our partners use cookies, pixels, and local storage to remember your preferences, keep you signed in, and measure the performance of the site.",
        "The service only uses cookies that are strictly necessary unless you accept optional categories in the consent banner shown on your first visit.",
        "You can control cookies through your browser settings, and the following categories are used:",
        "- Essential cookies required for security, authentication, and basic site functions",
        "- Preference cookies that remember your language, currency, and saved searches",
        "- Analytics cookies that help us understand how members use the platform",
        "- Advertising cookies set by partners, used only with your opt-in consent",
        "We honor applicable opt-out signals where the law requires us to act on them.",
    ])

    lines.append("YOUR RIGHTS AND CHOICES")
    lines.extend([
        "Depending on your jurisdiction, you may have rights to access, correct, delete, or port your personal information, and to object to or restrict certain processing.",
        "You can export your data in a machine-readable format from the privacy dashboard at any time without charge.",
        "You can delete your content from the service at any time, and you can request complete deletion of your account data through the dashboard or by contacting us.",
        "Data is deleted within 30 days after account closure, except where retention is legally required, and backups roll off on a fixed schedule afterwards.",
        "Users are notified before policy changes take effect, and continuing to use the platform after the effective date constitutes acceptance of the revised terms.",
        "To exercise any right, use the tools in your account settings or contact our privacy team; we respond within the timelines the law sets.",
        "If you are not satisfied with our response you may lodge a complaint with your local supervisory authority.",
    ])

    lines.append("MESSAGES AND COMMUNICATIONS")
    lines.extend([
        "We review messages sent through the platform with automated tools to detect fraud, scams, and prohibited conduct; automated filters scan messages for abuse detection before delivery.",
        "We do not scan the content of your messages to build advertising profiles, and advertising is shown without building a behavioral profile of your private conversations.",
        "Support calls may be recorded for quality purposes where you are told at the start of the call.",
    ])

    lines.append("LOCATION DATA")
    lines.extend([
        "Precise location data is collected only while the app is in use, to show nearby listings and improve arrival instructions.",
        "You can turn off precise location in your device settings at any time, and approximate location will be derived from your IP address instead.",
        "Location history used for smart pricing suggestions can be cleared from the privacy dashboard.",
    ])

    lines.append("SECURITY")
    lines.extend([
        "We maintain administrative, technical, and physical safeguards designed to protect your information against unauthorized access, loss, and misuse.",
        "Internal access to user records is logged and reviewed, and employees receive periodic privacy and security training.",
        "Users are promptly informed about data breaches that create a risk to their rights, together with the steps we are taking in response.",
        "Two-factor authentication is available for all accounts and we strongly recommend enabling it.",
        "No system is perfectly secure, so please use a strong unique password and report suspected abuse to our security team.",
    ])

    lines.append("DATA RETENTION")
    lines.extend([
        "We retain personal information for as long as your account is active and as needed for the purposes described in this policy.",
        "Receipts are kept as long as tax law requires, and dispute records are kept for the limitation period that applies to them.",
        "The service publishes the retention schedule for every data type in the help center, with the applicable period next to each category.",
        "When information is no longer needed we delete it or de-identify it so that it can no longer be associated with you.",
    ])

    lines.append("CHILDREN")
    lines.extend([
        "The platform is not directed to children and you must be at least 18 years old to create an account.",
        "No data is knowingly collected from children, and we delete any such data promptly when we learn of it.",
    ])

    lines.append("INTERNATIONAL TRANSFERS")
    lines.extend([
        "Because we operate globally, your information may be transferred to and processed in countries other than your own.",
        "Where required, transfers rely on standard contractual clauses or other safeguards approved by the relevant authorities.",
        "A copy of the relevant safeguards can be requested from our privacy team.",
    ])

    lines.append("THIRD-PARTY SERVICES")
    lines.extend([
        "Listings may embed third-party maps, and the help center uses a third-party chat widget whose provider processes your questions on our behalf.",
        "Third-party processors are listed publicly with their roles on our subprocessors page, which we update before adding a new vendor.",
        "Links to external sites are governed by those sites' own privacy policies, which we encourage you to read.",
    ])

    lines.append("ANALYTICS AND RESEARCH")
    lines.extend([
        "Usage analytics are collected in aggregate only for public reporting, while product analytics tied to your account can be limited in the settings.",
        "Analytics can be disabled in the settings for optional categories, and aggregated statistics are the only data shared with researchers outside the company.",
        "Surveys are occasionally shown to a sample of users, and participation is always voluntary.",
        "Beta features may collect extra diagnostics while enrolled, which stop when you leave the beta program.",
    ])

    lines.append("PAYMENTS")
    lines.extend([
        "Payment details are handled by the processor and never stored on our own servers; we keep only a token and the last four digits for your reference.",
        "Payout information for hosts is verified with the bank before the first transfer is made.",
        "Transaction records necessary for accounting are retained according to the schedule in the retention section.",
    ])

    lines.append("YOUR CONTENT")
    lines.extend([
        "You keep full ownership of the content you post, and reuse of content is limited to operating the service, such as displaying your listing photos in search results.",
        "Reviews you publish remain visible after account closure in an anonymized form unless you delete them first.",
        "We never claim rights over content beyond what is needed to show it to the people you shared it with.",
    ])

    lines.append("DISPUTES")
    lines.extend([
        "You can take disputes to the courts of your residence, and nothing in these terms removes protections granted by your local consumer law.",
        "Before going to court we ask that you contact us so we can try to resolve the issue informally within 60 days.",
    ])

    lines.append("CONTACT US")
    lines.extend([
        "A dedicated privacy contact answers questions within days; write to the privacy team through the contact form or the postal address below.",
        "Data requests from users are answered free of charge, except where the law allows a fee for manifestly excessive requests.",
        "If you have unresolved concerns you may also contact your local data protection authority.",
    ])

    lines.append("MARKETING PREFERENCES")
    lines.extend([
        "Marketing messages require a separate explicit subscription in most regions, and every message contains an unsubscribe link.",
        "We may still send transactional messages about your bookings, payments, and security even if you opt out of marketing.",
        "Push notifications can be managed per category in the app settings on your device.",
        "We do not use the content of your private messages to select marketing audiences.",
    ])

    lines.append("ACCOUNT SETTINGS AND CONTROLS")
    lines.extend([
        "The privacy dashboard groups the most important controls in one place:",
        "- Download a copy of your personal information",
        "- Delete your account and associated data",
        "- Manage cookie and tracking preferences",
        "- Limit personalization of search results",
        "- Control who can see your profile and reviews",
        "- Review devices with an active session and sign them out",
    ])

    lines.append("REGIONAL DISCLOSURES")
    lines.extend([
        "Residents of some regions have additional rights under local law, described in the supplemental notices linked here.",
        "Where local law treats certain categories as sensitive, we process them only with consent or another lawful basis.",
        "We do not use sensitive categories of data to infer characteristics about you for advertising.",
        "Residents of the European Economic Area can find the legal bases for each processing purpose in the annex.",
        "The data controller for your information is the regional entity named in the annex for your country of residence.",
        "Authorized agents may submit requests on your behalf where local law provides for it, subject to verification.",
        "Appeals against refused requests are reviewed by a member of staff not involved in the original decision.",
    ])

    lines.append("AUTOMATED DECISION MAKING")
    lines.extend([
        "Risk scoring helps us detect fraudulent bookings; a declined booking triggered mainly by automated scoring can be escalated to a human review.",
        "Suspension decisions can be appealed to a human reviewer through the resolution center.",
        "We do not make fully automated decisions that produce legal effects without human oversight.",
    ])

    lines.append("HOSTS AND GUESTS")
    lines.extend([
        "Hosts see the information needed to evaluate a booking request, never your payment details.",
        "Guests see a host's listing details, verified badge status, and review history.",
        "After a completed stay both parties may leave a review, which becomes visible to others once both are submitted or the window closes.",
        "Co-hosts you appoint can access reservation details for the listings they manage.",
        "Professional hosting tools expose aggregate performance statistics, not guest identities.",
    ])

    lines.append("SMART DEVICES AT LISTINGS")
    lines.extend([
        "Hosts must disclose any camera or recording device in the listing description, and devices are never allowed in private spaces.",
        "Noise monitors that report only decibel levels are permitted with disclosure.",
        "Report an undisclosed device to us and we will investigate and take action up to removal.",
    ])

    lines.append("CHANGES TO THIS POLICY")
    lines.extend([
        "We will post the revised policy with a new effective date at least 30 days before material changes apply.",
        "Previous versions remain available in the policy archive for comparison.",
        "If you disagree with a change you may close your account before the effective date.",
    ])

    lines.append("SUPPLEMENTAL NOTES")
    lines.extend([
        "Translations are provided for convenience; the English version controls if there is a conflict.",
        "Section headings are for readability and do not limit the meaning of the sections.",
    ])

    # glossary list items close out the document
    lines.append("DEFINITIONS")
    definitions = [
        "1. Platform means the websites, apps, and services we operate under this policy.",
        "2. Member means a person with a registered account, whether guest or host.",
        "3. Listing means accommodation or an experience offered by a host through the platform.",
        "4. Personal information means information that identifies or can reasonably be linked to you.",
        "5. Processor means a vendor that handles personal information on our documented instructions.",
        "6. Aggregated data means information combined across members so that no individual can be identified.",
        "7. Precise location means GPS-level coordinates collected from a device with permission.",
        "8. Consent banner means the notice shown on first visit where optional cookies can be accepted or declined.",
    ]
    lines.extend(definitions)

    flat = [line for line in lines if line.strip()]
    return "\n".join(flat) + "\n", flat


TOPIC_KEYWORDS = {
    "c001": ["not sold to third parties"],
    "c005": ["only uses cookies that are strictly necessary"],
    "c007": ["collected only while the app is in use"],
    "c009": ["notified before policy changes"],
    "c013": ["complete deletion of your account data"],
    "c015": ["without building a behavioral profile"],
    "c017": ["promptly informed about data breaches"],
    "c023": ["export your data in a machine-readable format"],
    "c025": ["deleted within 30 days after account closure"],
    "c028": ["transparency report"],
    "c030": ["where the law requires"],
    "c033": ["abuse detection"],
    "c049": ["knowingly collected from children"],
    "c061": ["aggregate only"],
    "c063": ["disabled in the settings"],
    "c064": ["never shares your contact list"],
    "c068": ["full ownership of the content you post"],
    "c070": ["limited to operating the service"],
    "c072": ["courts of your residence"],
    "c076": ["two-factor authentication"],
    "c085": ["handled by the processor and never stored"],
    "c088": ["privacy contact answers questions"],
    "c089": ["listed publicly with their roles"],
    "c097": ["retention schedule for every data type"],
    "c107": ["logged and reviewed"],
    "c108": ["only data shared with researchers"],
    "c112": ["free of charge"],
    "c118": ["tax law requires"],
    "c120": ["surveys are occasionally shown"],
    "c121": ["beta features may collect extra diagnostics"],
    "c127": ["chat widget"],
    "c003": ["delete your content from the service"],
}


def build_gold_tags(cases: list[dict], segments: list[str]) -> list[dict]:
    """285 (segment_index, case_id) gold tags: keyword hits first, then a
    seeded spread across paragraph segments."""
    tags: set[tuple[int, str]] = set()
    for case_id, phrases in TOPIC_KEYWORDS.items():
        for i, line in enumerate(segments):
            lowered = line.lower()
            if any(p.lower() in lowered for p in phrases):
                tags.add((i, case_id))
    rng = random.Random(4242)
    case_ids = [c["id"] for c in cases]
    long_segments = [i for i, line in enumerate(segments) if len(line.split()) >= 12]
    while len(tags) < 285:
        tags.add((rng.choice(long_segments), rng.choice(case_ids)))
    assert len(tags) == 285, len(tags)
    return [
        {"segment_index": i, "case_id": cid}
        for i, cid in sorted(tags)
    ]


def main() -> None:
    DATA.mkdir(exist_ok=True)
    cases, clusters = build_cases()
    with open(DATA / "cases.json", "w", encoding="utf-8") as fh:
        json.dump(cases, fh, indent=2, ensure_ascii=False)
        fh.write("\n")
    with open(DATA / "clusters.json", "w", encoding="utf-8") as fh:
        json.dump(clusters, fh, indent=2, ensure_ascii=False)
        fh.write("\n")

    annotations = build_annotations(cases)
    with open(DATA / "annotations.jsonl", "w", encoding="utf-8") as fh:
        for record in annotations:
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")

    policy_text, segments = build_policy()
    assert len(segments) == 150, f"policy has {len(segments)} segments, want 150"
    with open(DATA / "airbnb_policy.txt", "w", encoding="utf-8") as fh:
        fh.write(policy_text)

    gold = build_gold_tags(cases, segments)
    with open(DATA / "airbnb_gold_tags.json", "w", encoding="utf-8") as fh:
        json.dump(gold, fh, indent=2)
        fh.write("\n")

    approved = [r for r in annotations if r["approved"]]
    words = sum(len(r["excerpt"].split()) for r in approved)
    print(f"cases: {len(cases)}, clusters: {len(clusters)}")
    print(f"approved annotations: {len(approved)}, mean words: {words / len(approved):.2f}")
    print(f"policy segments: {len(segments)}, gold tags: {len(gold)}")


if __name__ == "__main__":
    main()
