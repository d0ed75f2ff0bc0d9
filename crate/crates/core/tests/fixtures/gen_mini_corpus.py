"""Writes the 12-page mini corpus: six sites, two pages each, en/ru/zh."""
import json
import pathlib

ROOT = pathlib.Path(__file__).parent / "mini_corpus"

NAV = {
    "en": ["Home", "World", "Business", "Sport", "Contact"],
    "ru": ["Главная", "Политика", "Экономика", "Спорт", "Контакты"],
    "zh": ["首页", "国内", "国际", "财经", "体育"],
}
FOOTER = {
    "en": "Copyright 2023. All rights reserved.",
    "ru": "Все права защищены, 2023.",
    "zh": "版权所有 2023",
}

SITES = [
    {
        "site": "thebugle.com", "lang": "en", "name": "The Bugle", "layout": "meta",
        "pages": [
            {
                "title": "City council approves new river bridge",
                "iso": "2023-05-14T09:30:00+00:00", "shown": "14 May 2023",
                "authors": ["Anna Clarke"], "tags": ["Transport", "Local politics"],
                "text": [
                    "The city council voted on Tuesday to approve funding for a new bridge across the river.",
                    "Construction is expected to begin next spring and will take about two years to complete.",
                    "Residents on both banks have campaigned for a second crossing for more than a decade.",
                ],
            },
            {
                "title": "Local bakery wins national bread award",
                "iso": "2023-06-02T14:05:00+00:00", "shown": "2 June 2023",
                "authors": ["Tom Hughes", "Priya Shah"], "tags": ["Food"],
                "text": [
                    "A family bakery on Mill Street has been named the best independent bakery in the country.",
                    "The judges praised its sourdough loaf, which is proved for thirty hours before baking.",
                    "The owners said they would celebrate by giving away free bread to customers on Saturday.",
                ],
            },
        ],
    },
    {
        "site": "harbourtimes.co.uk", "lang": "en", "name": "Harbour Times", "layout": "plain",
        "pages": [
            {
                "title": "Ferry timetable changes for the summer season",
                "iso": "2023-04-21T08:00:00+01:00", "shown": "21 April 2023",
                "authors": ["Mark Evans"], "tags": ["Travel", "Ferries"],
                "text": [
                    "The harbour authority has published a revised ferry timetable that starts next month.",
                    "Morning sailings will leave thirty minutes earlier to match the first trains to the city.",
                    "Evening services on Fridays and Saturdays will run until midnight during July and August.",
                    "Passengers can check the new times on the noticeboards at both terminals.",
                ],
            },
            {
                "title": "Lifeboat crew rescues two kayakers off the point",
                "iso": "2023-07-09T17:45:00+01:00", "shown": "9 July 2023",
                "authors": ["Sarah Mills"], "tags": ["Rescue"],
                "text": [
                    "Two kayakers were brought ashore on Sunday after strong winds pushed them out to sea.",
                    "The volunteer lifeboat crew reached the pair within twenty minutes of the alarm.",
                    "Both were checked by paramedics on the quay and did not need hospital treatment.",
                ],
            },
        ],
    },
    {
        "site": "vestnik.ru", "lang": "ru", "name": "Вестник", "layout": "meta",
        "pages": [
            {
                "title": "В городе открылся новый парк",
                "iso": "2023-05-14T09:30:00+03:00", "shown": "14 мая 2023",
                "authors": ["Иван Петров"], "tags": ["Город", "Экология"],
                "text": [
                    "В субботу в северной части города открылся новый парк площадью двенадцать гектаров.",
                    "В парке высадили более трёх тысяч деревьев и построили детские площадки.",
                    "Власти обещают, что к осени здесь появятся велодорожки и летнее кафе.",
                ],
            },
            {
                "title": "Местная команда вышла в финал кубка",
                "iso": "2023-06-20T21:15:00+03:00", "shown": "20 июня 2023",
                "authors": ["Мария Соколова"], "tags": ["Спорт"],
                "credit": "Фото: Пётр Лебедев",
                "text": [
                    "Футбольная команда города одержала победу в полуфинале со счётом два один.",
                    "Решающий гол был забит на последней минуте основного времени матча.",
                    "Финал кубка пройдёт в следующее воскресенье на центральном стадионе.",
                ],
            },
        ],
    },
    {
        "site": "ngazeta.ru", "lang": "ru", "name": "Новая газета района", "layout": "plain",
        "pages": [
            {
                "title": "Школы переходят на новое расписание",
                "iso": "2023-08-28T10:00:00+03:00", "shown": "28 августа 2023",
                "authors": ["Ольга Иванова"], "tags": ["Образование"],
                "text": [
                    "С первого сентября занятия во всех школах района будут начинаться на полчаса позже.",
                    "Решение приняли после опроса родителей, в котором участвовали две тысячи семей.",
                    "Продолжительность уроков и перемен при этом останется прежней.",
                ],
            },
            {
                "title": "На набережной завершили ремонт",
                "iso": "2023-09-05T12:30:00+03:00", "shown": "5 сентября 2023",
                "authors": ["Алексей Смирнов"], "tags": ["Город"],
                "text": [
                    "Ремонт набережной, который длился почти год, официально завершён.",
                    "Рабочие заменили покрытие, установили новые скамейки и фонари.",
                    "Вечером на набережной прошёл концерт местного оркестра.",
                ],
            },
        ],
    },
    {
        "site": "xinwen.cn", "lang": "zh", "name": "新闻网", "layout": "meta",
        "pages": [
            {
                "title": "城市地铁新线路正式开通",
                "iso": "2023-05-14T09:30:00+08:00", "shown": "2023年5月14日",
                "authors": ["王伟"], "tags": [],
                "text": [
                    "本市地铁五号线于周日上午正式开通运营，全长二十八公里。",
                    "新线路设有二十个车站，连接城市东部和西部的主要居住区。",
                    "运营初期，列车发车间隔为六分钟，高峰时段将进一步缩短。",
                    "市民纷纷表示，新线路大大方便了日常出行，通勤时间明显减少。",
                ],
            },
            {
                "title": "今年夏季粮食喜获丰收",
                "iso": "2023-07-30T16:00:00+08:00", "shown": "2023年7月30日",
                "authors": ["李娜"], "tags": [],
                "text": [
                    "据农业部门统计，今年夏季粮食总产量比去年增长百分之三。",
                    "良好的天气条件和新品种的推广是增产的主要原因。",
                    "专家表示，秋季粮食生产形势同样值得期待。",
                    "各地农民正在抓紧时间晾晒和储存新收获的小麦，确保颗粒归仓，今年的收购价格也保持稳定。",
                ],
            },
        ],
    },
    {
        "site": "ribao.com.cn", "lang": "zh", "name": "日报", "layout": "plain",
        "pages": [
            {
                "title": "博物馆推出夜间开放活动",
                "iso": "2023-06-10T19:00:00+08:00", "shown": "2023年6月10日",
                "authors": ["张敏"], "tags": [],
                "text": [
                    "市博物馆宣布，从本周起每周五和周六晚上延长开放至九点。",
                    "夜间开放期间，观众可以参加专题讲座和互动体验活动。",
                    "博物馆提醒观众提前在网上预约参观时间。",
                    "活动期间，馆内餐厅和纪念品商店也将同步延长营业时间，周边公交线路同样增加了夜间班次。",
                ],
            },
            {
                "title": "新建图书馆迎来首批读者",
                "iso": "2023-09-01T08:30:00+08:00", "shown": "2023年9月1日",
                "authors": ["陈刚"], "tags": [],
                "text": [
                    "位于市中心的新图书馆于九月一日正式对外开放。",
                    "图书馆藏书超过五十万册，并设有儿童阅览区和自习室。",
                    "开馆当天，数千名读者排队进入参观。",
                    "图书馆负责人表示，今后还将定期举办读书分享会和展览活动，欢迎市民积极参与并提出宝贵意见。",
                ],
            },
        ],
    },
]


def esc(s):
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


def nav(lang):
    items = "".join(f'<li><a href="/{i}">{esc(n)}</a></li>' for i, n in enumerate(NAV[lang]))
    return f'<nav class="menu"><ul>{items}</ul></nav>'


def meta_page(site, page):
    tags_meta = "".join(f'<meta property="article:tag" content="{esc(t)}">' for t in page["tags"])
    authors = "".join(f'<a rel="author" href="/authors/{i}">{esc(a)}</a>' for i, a in enumerate(page["authors"]))
    tags = "".join(f'<li><a rel="tag" href="/tag/{i}">{esc(t)}</a></li>' for i, t in enumerate(page["tags"]))
    tag_list = f'<ul class="tags">{tags}</ul>' if page["tags"] else ""
    paras = "".join(f"<p>{esc(p)}</p>" for p in page["text"])
    if "credit" in page:
        paras += f'<figure><figcaption class="photo-author">{esc(page["credit"])}</figcaption></figure>'
    return f"""<!DOCTYPE html>
<html lang="{site['lang']}"><head><meta charset="utf-8">
<title>{esc(page['title'])} | {esc(site['name'])}</title>
<meta property="og:title" content="{esc(page['title'])}">
<meta property="article:published_time" content="{page['iso']}">
{tags_meta}
<script>window.dataLayer = [];</script>
<style>body {{ margin: 0 }}</style>
</head><body>
<header><div class="logo">{esc(site['name'])}</div>{nav(site['lang'])}</header>
<main><article>
<h1 class="headline">{esc(page['title'])}</h1>
<div class="meta"><time datetime="{page['iso']}">{esc(page['shown'])}</time><span class="authors">{authors}</span></div>
<div class="article-body">{paras}</div>
{tag_list}
</article></main>
<footer><p>{esc(FOOTER[site['lang']])}</p></footer>
</body></html>
"""


def plain_page(site, page):
    authors = "".join(f'<span class="author-name">{esc(a)}</span>' for a in page["authors"])
    tags = "".join(f'<a rel="tag" href="/t/{i}">{esc(t)}</a>' for i, t in enumerate(page["tags"]))
    tag_list = f'<div class="topics">{tags}</div>' if page["tags"] else ""
    paras = "".join(f"<p>{esc(p)}</p>" for p in page["text"])
    return f"""<!DOCTYPE html>
<html><head><meta charset="utf-8">
<title>{esc(page['title'])} - {esc(site['name'])}</title>
<meta name="description" content="{esc(page['text'][0])}">
</head><body>
<div id="top">{nav(site['lang'])}</div>
<div class="page">
<div class="story">
<h1>{esc(page['title'])}</h1>
<div class="story-info"><span class="date">{esc(page['shown'])}</span>{authors}</div>
<div class="story-text">{paras}</div>
{tag_list}
</div>
<aside class="sidebar"><div class="widget">{esc(site['name'])}</div></aside>
</div>
<div class="bottom"><p>{esc(FOOTER[site['lang']])}</p></div>
</body></html>
"""


def selectors(site, page):
    if site["layout"] == "meta":
        sel = {
            "title": {"css": "h1.headline"},
            "date": {"css": "div.meta time"},
            "text": {"css": "div.article-body p"},
            "authors": {"css": "a[rel=author]"},
        }
        if page["tags"]:
            sel["tags"] = {"css": "ul.tags a"}
    else:
        sel = {
            "title": {"css": "div.story h1"},
            "date": {"css": "span.date"},
            "text": {"css": "div.story-text p"},
            "authors": {"css": "span.author-name"},
        }
        if page["tags"]:
            sel["tags"] = {"css": "div.topics a"}
    return sel


def main():
    for site in SITES:
        d = ROOT / site["site"]
        d.mkdir(parents=True, exist_ok=True)
        for k, page in enumerate(site["pages"], start=1):
            html = meta_page(site, page) if site["layout"] == "meta" else plain_page(site, page)
            (d / f"page_{k}.html").write_text(html, encoding="utf-8")
            attrs = {"title": [page["title"]], "date": [page["shown"]], "text": page["text"],
                     "authors": page["authors"]}
            if page["tags"]:
                attrs["tags"] = page["tags"]
            doc = {
                "url": f"https://{'www.' if k == 1 else ''}{site['site']}/news/{k}",
                "language": site["lang"],
                "attributes": attrs,
                "selectors": selectors(site, page),
            }
            (d / f"page_{k}.json").write_text(json.dumps(doc, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
        sitemap = {"site_id": site["site"], "selectors": selectors(site, site["pages"][0])}
        (d / "sitemap.json").write_text(json.dumps(sitemap, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
