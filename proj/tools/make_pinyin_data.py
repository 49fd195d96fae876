#!/usr/bin/env python3
"""Regenerates the shipped pinyin data files under data/.

Source of truth is the curated SYLLABLE_CHARS table below: one line per toned
syllable followed by the characters whose most common reading it is
(polyphonic characters are listed under their default reading only).

Outputs:
  data/char_pinyin.tsv   char<TAB>syllable, sorted by code point
  data/initials.txt      initial vocabulary (empty initial not listed)
  data/finals.txt        final vocabulary, derived from the table
  data/confusions.tsv    demo confusion set: same-base-syllable neighbours

Also validates that every paragraph in data/sample_corpus/*.txt is covered by
the table (ignoring punctuation/ASCII).
"""

import collections
import pathlib
import re
import sys

INITIALS = [
    "b", "p", "m", "f", "d", "t", "n", "l", "g", "k", "h",
    "j", "q", "x", "zh", "ch", "sh", "r", "z", "c", "s", "y", "w",
]

SYLLABLE_CHARS = """
a1 阿
ai1 哀埃唉
ai2 癌
ai3 矮
ai4 爱碍艾隘
an1 安鞍氨
an3 俺
an4 案按暗岸
ang1 肮
ang2 昂
ang4 盎
ao2 熬
ao3 袄
ao4 奥傲澳懊
ba1 八巴疤芭捌
ba2 拔跋
ba3 把靶
ba4 爸坝罢霸
ba5 吧
bai1 掰
bai2 白
bai3 百摆柏
bai4 败拜
ban1 班般搬斑颁
ban3 板版
ban4 办半伴扮拌瓣
bang1 帮邦
bang3 绑榜膀
bang4 棒磅傍镑
bao1 包胞褒
bao2 雹
bao3 宝保饱堡
bao4 报抱爆暴豹鲍
bei1 杯悲碑
bei3 北
bei4 被备倍辈背贝狈
ben1 奔
ben3 本
ben4 笨
beng1 崩绷
beng4 蹦迸
bi1 逼
bi2 鼻
bi3 比笔彼鄙
bi4 必币毕闭避壁臂碧弊蔽
bian1 边编鞭蝙
bian3 扁贬
bian4 变便遍辩辨辫
biao1 标彪膘
biao3 表
bie1 憋鳖
bie2 别
bie3 瘪
bin1 宾滨彬
bin4 鬓
bing1 冰兵
bing3 丙饼柄秉
bing4 病并
bo1 波拨播玻菠
bo2 博伯脖舶勃渤泊
bo3 跛
bu3 补捕卜
bu4 不部布步怖簿埠
ca1 擦
cai1 猜
cai2 才财材裁
cai3 采彩踩睬
cai4 菜蔡
can1 参餐
can2 残蚕惭
can3 惨
can4 灿
cang1 仓苍舱沧
cang2 藏
cao1 操糙
cao2 曹槽
cao3 草
ce4 测侧册厕策
ceng2 层曾
ceng4 蹭
cha1 插叉
cha2 查茶察搽
cha4 差岔诧
chai1 拆
chai2 柴豺
chan1 搀
chan2 缠蝉馋禅
chan3 产铲阐
chan4 颤
chang1 昌猖
chang2 长常尝肠偿
chang3 厂场敞
chang4 唱畅倡
chao1 超抄钞
chao2 朝潮巢嘲
chao3 吵炒
che1 车
che3 扯
che4 彻撤澈
chen2 陈沉晨尘辰臣
chen4 趁衬
cheng1 称撑
cheng2 成城程乘诚承橙呈惩澄
cheng3 逞
cheng4 秤
chi1 吃痴
chi2 持池迟驰匙
chi3 尺齿耻侈
chi4 赤斥翅炽
chong1 冲充憧
chong2 虫崇
chong3 宠
chou1 抽
chou2 愁仇绸稠筹酬畴
chou3 丑瞅
chou4 臭
chu1 出初
chu2 除厨橱锄雏
chu3 储楚础
chu4 触
chuan1 穿川
chuan2 传船
chuan3 喘
chuan4 串
chuang1 窗疮
chuang2 床
chuang3 闯
chuang4 创
chui1 吹炊
chui2 垂锤捶
chun1 春
chun2 纯唇醇
chun3 蠢
chuo1 戳
ci2 词慈磁雌辞瓷
ci3 此
ci4 次刺赐
cong1 聪葱匆
cong2 从丛
cou4 凑
cu1 粗
cu4 促醋簇
cuan4 窜篡
cui1 催摧崔
cui4 脆翠粹萃
cun1 村
cun2 存
cun4 寸
cuo1 搓磋
cuo4 错措挫
da1 搭
da2 达答
da3 打
da4 大
dai1 呆
dai3 歹
dai4 带代待贷戴袋怠殆黛
dan1 单担耽丹
dan3 胆
dan4 但蛋淡弹氮旦诞
dang1 当铛
dang3 党挡
dang4 荡档
dao1 刀叨
dao3 导岛倒捣蹈祷
dao4 到道盗稻悼
de2 得德
de5 的
deng1 灯登蹬
deng3 等
deng4 凳瞪邓
di1 低滴堤
di2 敌笛涤迪
di3 底抵
di4 地第弟帝递蒂
dian1 颠掂
dian3 点典碘
dian4 电店垫殿淀奠惦
diao1 叼雕凋
diao4 掉调吊钓
die1 爹跌
die2 叠蝶碟谍
ding1 丁叮盯钉
ding3 顶鼎
ding4 定订
diu1 丢
dong1 东冬
dong3 懂董
dong4 动冻洞栋
dou1 兜都
dou3 抖陡
dou4 豆逗痘斗
du1 督嘟
du2 读独毒
du3 堵赌睹
du4 度渡肚妒杜镀
duan1 端
duan3 短
duan4 段断锻缎
dui1 堆
dui4 对队兑
dun1 吨蹲墩
dun4 顿盾钝炖
duo1 多哆
duo2 夺
duo3 朵躲
duo4 惰堕舵剁
e2 额俄鹅蛾讹
e4 饿恶厄扼遏鳄
en1 恩
er2 而儿
er3 耳尔饵
er4 二贰
fa1 发
fa2 罚乏伐阀筏
fa3 法
fan1 翻帆番
fan2 凡烦繁樊
fan3 反返
fan4 饭犯范泛贩
fang1 方芳坊
fang2 房防妨肪
fang3 访仿纺
fang4 放
fei1 飞非啡菲妃
fei2 肥
fei3 匪诽
fei4 费废肺沸吠
fen1 分纷芬吩氛
fen2 坟焚
fen3 粉
fen4 份奋愤粪忿
feng1 风封丰峰蜂疯锋枫
feng2 逢冯
feng3 讽
feng4 凤奉
fo2 佛
fou3 否
fu1 夫肤敷孵
fu2 服福符浮扶幅伏俘袱拂
fu3 府腐辅抚斧俯
fu4 父负付副富妇附复腹赴覆傅缚
gai1 该
gai3 改
gai4 盖概钙丐
gan1 甘肝竿尴
gan3 感敢赶
gan4 干
gang1 刚钢纲缸
gang3 港岗
gang4 杠
gao1 高糕膏羔
gao3 搞稿
gao4 告
ge1 哥歌割搁鸽胳疙
ge2 格隔革阁葛
ge4 个各
gei3 给
gen1 根跟
geng1 耕羹
geng3 耿梗
geng4 更
gong1 工公功攻宫恭躬弓供
gong3 巩汞
gong4 共贡
gou1 沟钩勾
gou3 狗苟
gou4 够购构垢
gu1 姑孤估辜菇咕
gu3 古股骨谷鼓蛊
gu4 故顾固雇
gua1 瓜刮
gua3 寡
gua4 挂卦
guai1 乖
guai3 拐
guai4 怪
guan1 关观官棺
guan3 管馆
guan4 惯灌罐贯
guang1 光
guang3 广
guang4 逛
gui1 规归龟硅闺
gui3 鬼轨诡
gui4 贵桂柜跪刽
gun3 滚
gun4 棍
guo1 锅郭
guo2 国
guo3 果裹
guo4 过
ha1 哈
hai2 还孩
hai3 海
hai4 害骇氦
han1 憨酣
han2 含寒韩涵函
han3 喊罕
han4 汉汗旱焊憾撼翰
hang2 航杭
hao2 豪毫嚎壕
hao3 好
hao4 号耗浩
he1 喝
he2 和河何合盒核荷禾
he4 贺赫鹤
hei1 黑嘿
hen2 痕
hen3 很狠
hen4 恨
heng1 哼
heng2 横衡恒
hong1 轰烘
hong2 红宏洪虹鸿
hou2 猴喉侯
hou3 吼
hou4 后厚候
hu1 呼忽乎
hu2 湖胡壶糊蝴狐弧
hu3 虎唬
hu4 户护互沪
hua1 花哗
hua2 华滑猾
hua4 话化画
huai2 怀淮徊
huai4 坏
huan1 欢
huan2 环
huan3 缓
huan4 换唤患幻焕痪
huang1 荒慌
huang2 黄皇煌惶蝗磺
huang3 谎
hui1 灰挥辉恢徽
hui2 回茴
hui3 悔毁
hui4 会汇惠慧贿讳绘晦
hun1 婚昏荤
hun2 浑魂
hun4 混
huo2 活
huo3 火伙
huo4 或货获祸惑霍
ji1 机鸡基击积肌饥圾讥叽稽缉
ji2 极及级急集即吉疾辑籍嫉
ji3 几己挤脊
ji4 记计济技际季寄既继纪忌剂迹绩寂祭妓冀
jia1 家加佳嘉夹
jia2 颊
jia3 假甲钾
jia4 价架驾嫁稼
jian1 间坚尖肩兼监煎歼奸
jian3 检简减剪捡拣碱茧
jian4 见件建健键箭剑荐溅舰鉴渐践贱
jiang1 江将姜僵疆浆
jiang3 讲奖桨蒋
jiang4 降酱匠
jiao1 交浇骄娇胶椒郊焦蕉礁
jiao3 脚角绞饺狡搅缴
jiao4 叫教较轿窖酵
jie1 接街阶皆揭
jie2 节结杰洁截捷竭劫睫
jie3 解姐
jie4 界借介戒届诫
jin1 金今斤筋津巾襟
jin3 紧谨锦仅
jin4 进近尽劲禁浸晋
jing1 经京精惊睛晶鲸茎荆兢
jing3 警景井颈
jing4 静境镜竟竞敬净径
jiu1 究纠揪
jiu3 九久酒玖
jiu4 就旧救舅疚
ju1 居拘鞠
ju2 局菊橘
ju3 举矩沮
ju4 句据具巨距聚剧俱惧锯
juan1 捐娟
juan3 卷
juan4 倦绢眷
jue2 觉决绝掘爵诀
jun1 军均君菌钧
jun4 俊峻竣骏
ka1 咖喀
ka3 卡
kai1 开揩
kai3 凯慨
kan1 刊勘堪
kan3 砍坎侃
kan4 看
kang1 康慷糠
kang2 扛
kang4 抗炕亢
kao3 考烤拷
kao4 靠
ke1 科颗棵柯磕蝌
ke2 壳咳
ke3 可渴
ke4 课客克刻
ken3 肯恳啃
keng1 坑
kong1 空
kong3 孔恐
kong4 控
kou1 抠
kou3 口
kou4 扣寇
ku1 哭枯窟
ku3 苦
ku4 库裤酷
kua1 夸
kua3 垮
kua4 跨挎胯
kuai4 快块筷
kuan1 宽
kuan3 款
kuang1 筐
kuang2 狂
kuang4 况矿框旷眶
kui1 亏盔窥
kui2 葵魁
kui4 愧馈溃
kun1 昆
kun3 捆
kun4 困
kuo4 扩括阔廓
la1 拉垃
la4 辣蜡腊
la5 啦
lai2 来莱
lai4 赖
lan2 蓝兰栏拦篮澜婪
lan3 览懒缆揽
lan4 烂滥
lang2 狼郎廊
lang3 朗
lang4 浪
lao1 捞
lao2 劳牢唠
lao3 老姥
lao4 涝烙
le4 乐勒
le5 了
lei2 雷
lei3 垒蕾
lei4 类泪累
leng2 棱
leng3 冷
leng4 愣
li2 离梨犁璃黎厘篱
li3 里理李礼鲤
li4 力立利例历丽励厉粒莉隶栗吏沥
lia3 俩
lian2 连联莲廉帘怜镰
lian3 脸敛
lian4 练恋炼链
liang2 良凉梁粮粱
liang3 两
liang4 亮辆量谅晾
liao2 聊疗辽僚缭
liao4 料
lie4 列烈裂猎劣
lin2 林临邻琳磷鳞淋
lin4 吝
ling2 零铃灵龄凌陵玲
ling3 领岭
ling4 另令
liu1 溜
liu2 流留刘榴瘤硫
liu3 柳
liu4 六
long2 龙隆笼聋咙
long3 拢垄
lou2 楼
lou3 搂
lou4 漏陋
lu2 炉卢芦庐
lu3 鲁卤
lu4 路录陆露鹿碌赂麓
lv2 驴
lv3 旅履屡铝
lv4 绿律虑滤
lve4 略掠
luan3 卵
luan4 乱
lun2 轮伦沦仑
lun4 论
luo2 罗萝锣螺骡逻
luo3 裸
luo4 落络骆洛
ma1 妈
ma2 麻蟆
ma3 马码蚂
ma4 骂
ma5 吗嘛
mai2 埋
mai3 买
mai4 卖麦脉迈
man2 蛮馒瞒
man3 满
man4 慢漫蔓曼
mang2 忙盲茫芒
mao1 猫
mao2 毛矛茅锚
mao4 帽冒贸茂貌
me5 么
mei2 没煤梅眉媒枚霉玫
mei3 美每
mei4 妹媚魅
men2 门
men4 闷
men5 们
meng2 蒙萌盟檬
meng3 猛
meng4 梦孟
mi1 眯
mi2 迷谜弥
mi3 米
mi4 密蜜秘觅泌
mian2 棉眠绵
mian3 免勉缅
mian4 面
miao2 苗描瞄
miao3 秒渺
miao4 妙庙
mie4 灭蔑
min2 民
min3 敏悯闽
ming2 明名鸣铭冥
ming4 命
miu4 谬
mo1 摸
mo2 模磨魔膜摩蘑
mo3 抹
mo4 末墨默莫漠陌沫
mou2 谋
mou3 某
mu3 母亩姆拇
mu4 木目墓幕慕牧募睦穆
na2 拿
na3 哪
na4 那纳钠
nai3 奶乃
nai4 耐奈
nan2 南难男
nao3 脑恼
nao4 闹
ne5 呢
nei4 内
nen4 嫩
neng2 能
ni2 泥尼
ni3 你拟
ni4 逆腻匿溺
nian2 年黏
nian3 捻碾
nian4 念
niang2 娘
niang4 酿
niao3 鸟
niao4 尿
nie1 捏
nin2 您
ning2 宁凝柠
niu2 牛
niu3 扭纽钮
nong2 农浓脓
nong4 弄
nu2 奴
nu3 努
nu4 怒
nv3 女
nuan3 暖
nuo2 挪
nuo4 诺懦糯
o2 哦
ou1 欧鸥殴
ou3 偶呕藕
pa1 趴
pa2 爬
pa4 怕帕
pai1 拍
pai2 排牌徘
pai4 派
pan1 攀潘
pan2 盘
pan4 判盼叛畔
pang2 旁庞螃
pang4 胖
pao1 抛
pao2 袍
pao3 跑
pao4 炮泡
pei1 胚
pei2 陪培赔
pei4 配佩沛
pen1 喷
pen2 盆
peng1 烹砰
peng2 朋棚蓬膨彭篷
peng3 捧
peng4 碰
pi1 批披劈霹坯
pi2 皮疲脾啤琵
pi3 匹
pi4 屁僻
pian1 篇偏翩
pian4 片骗
piao4 票
pie1 瞥
pie3 撇
pin1 拼
pin2 贫频
pin3 品
pin4 聘
ping1 乒
ping2 平评瓶凭苹屏萍
po1 坡泼颇
po2 婆
po4 破迫魄
pou1 剖
pu1 扑铺
pu2 仆葡菩蒲
pu3 普谱朴浦
pu4 瀑
qi1 七期欺漆妻凄戚柒沏
qi2 其奇骑旗齐棋歧祈脐
qi3 起企启乞岂
qi4 气器汽弃泣契砌迄
qia1 掐
qia4 恰洽
qian1 千签牵铅谦迁仟
qian2 前钱潜黔钳
qian3 浅遣谴
qian4 欠歉嵌
qiang1 枪腔
qiang2 强墙蔷
qiang3 抢
qiao1 敲锹跷
qiao2 桥瞧乔侨
qiao3 巧
qiao4 俏窍
qie1 切
qie2 茄
qie3 且
qie4 窃怯
qin1 亲侵钦
qin2 勤琴秦禽芹
qin3 寝
qing1 清轻青倾卿氢蜻
qing2 情晴擎
qing3 请顷
qing4 庆
qiong2 穷琼
qiu1 秋丘邱蚯
qiu2 求球囚酋
qu1 区驱屈曲躯趋
qu2 渠
qu3 取娶
qu4 去趣
quan1 圈
quan2 全权泉拳痊诠
quan3 犬
quan4 劝券
que1 缺
que2 瘸
que4 却确雀鹊
qun2 群裙
ran2 然燃
ran3 染冉
rang3 嚷壤攘
rang4 让
rao2 饶
rao3 扰
rao4 绕
re3 惹
re4 热
ren2 人仁
ren3 忍
ren4 认任韧刃妊
reng1 扔
reng2 仍
ri4 日
rong2 容荣融绒溶熔蓉
rong3 冗
rou2 柔揉
rou4 肉
ru2 如儒蠕
ru3 乳辱
ru4 入褥
ruan3 软
rui3 蕊
rui4 锐瑞
run4 润闰
ruo4 若弱
sa3 洒
sa4 萨
sai1 塞腮
sai4 赛
san1 三叁
san3 伞
san4 散
sang1 桑
sang3 嗓
sang4 丧
sao1 骚搔
sao3 扫嫂
se4 色涩瑟
sen1 森
sha1 沙杀纱砂鲨
sha3 傻
sha4 厦
shai1 筛
shai4 晒
shan1 山衫删珊煽杉
shan3 闪陕
shan4 善扇擅膳赡
shang1 商伤
shang3 赏晌
shang4 上尚
shao1 烧稍捎梢
shao2 勺
shao3 少
shao4 绍哨
she1 奢
she2 蛇舌
she3 舍
she4 社射设摄涉赦
shei2 谁
shen1 身深伸申呻绅
shen2 神什
shen3 审婶沈
shen4 甚肾慎渗
sheng1 生声升牲甥
sheng2 绳
sheng3 省
sheng4 胜盛剩圣
shi1 师诗失施湿狮尸虱
shi2 十时实识石食拾蚀
shi3 使始史驶屎矢
shi4 是事市式世士视试室示势适释饰氏逝誓嗜拭
shou1 收
shou3 手首守
shou4 受售授瘦兽寿
shu1 书输舒叔殊疏梳蔬枢
shu2 熟赎
shu3 属鼠暑署薯
shu4 树术束述数竖恕墅
shua1 刷
shua3 耍
shuai1 摔衰
shuai3 甩
shuai4 帅
shuan1 拴栓
shuan4 涮
shuang1 双霜
shuang3 爽
shui3 水
shui4 睡税
shun4 顺瞬
shuo1 说
shuo4 硕烁
si1 思司私丝斯撕嘶
si3 死
si4 四似寺肆饲
song1 松
song3 耸
song4 送宋诵颂讼
sou1 搜艘
sou4 嗽
su1 苏酥
su2 俗
su4 素速塑宿诉肃
suan1 酸
suan4 算蒜
sui1 虽
sui2 随隋
sui3 髓
sui4 岁碎遂隧穗
sun1 孙
sun3 损笋
suo1 缩梭唆
suo3 所索锁琐
ta1 他她它塌
ta3 塔
ta4 踏
tai2 台抬苔
tai4 太态泰汰
tan1 贪摊瘫滩
tan2 谈坛痰潭昙檀
tan3 坦毯忐
tan4 探叹炭碳
tang1 汤
tang2 堂糖唐塘膛
tang3 躺倘
tang4 烫趟
tao1 掏涛滔
tao2 逃桃陶淘萄
tao3 讨
tao4 套
te4 特
teng2 疼腾藤誊
ti1 梯踢剔
ti2 提题蹄啼
ti3 体
ti4 替剃涕惕屉
tian1 天添
tian2 田甜填
tian3 舔
tiao1 挑
tiao2 条
tiao4 跳眺
tie1 贴
tie3 铁
ting1 听厅
ting2 停庭亭廷蜓
ting3 挺艇
tong1 通
tong2 同铜童桐瞳
tong3 统桶筒捅
tong4 痛
tou1 偷
tou2 头投
tou4 透
tu1 突秃凸
tu2 图途涂徒屠
tu3 土吐
tu4 兔
tuan2 团
tui1 推
tui3 腿
tui4 退
tun1 吞
tun2 屯臀
tuo1 脱拖托
tuo2 驼陀鸵
tuo3 妥椭
tuo4 拓唾
wa1 挖蛙哇洼
wa2 娃
wa3 瓦
wa4 袜
wai1 歪
wai4 外
wan1 弯湾豌
wan2 完玩丸顽
wan3 晚碗挽婉惋
wan4 万腕
wang1 汪
wang2 王亡
wang3 网往枉
wang4 忘望旺妄
wei1 威微危巍
wei2 为围维违唯惟桅
wei3 伟委尾纬伪萎
wei4 位味未卫胃谓喂慰魏蔚
wen1 温瘟
wen2 文闻蚊纹
wen3 稳吻紊
wen4 问
weng1 翁嗡
wo1 窝蜗
wo3 我
wo4 握卧沃
wu1 屋乌污巫呜诬钨
wu2 无吴梧芜
wu3 五午武舞伍侮捂
wu4 物务误悟雾勿晤
xi1 西希吸析息悉昔惜稀溪熄锡牺膝嘻蜥
xi2 习席袭媳
xi3 洗喜
xi4 系细戏隙
xia1 瞎虾
xia2 狭峡霞侠暇
xia4 下夏吓
xian1 先鲜仙掀锨
xian2 闲嫌咸弦贤衔
xian3 显险
xian4 现线县限献宪陷馅羡腺
xiang1 香乡相箱厢镶湘
xiang2 详祥翔
xiang3 想响享
xiang4 向象像项橡巷
xiao1 消销萧削宵硝嚣
xiao3 小晓
xiao4 笑效校孝肖啸
xie1 些歇蝎
xie2 鞋斜协邪胁谐携
xie3 写
xie4 谢卸泄屑械蟹懈泻
xin1 心新辛欣薪芯锌
xin4 信衅
xing1 星兴腥猩
xing2 行形型刑邢
xing3 醒
xing4 性姓幸杏
xiong1 胸凶兄汹
xiong2 雄熊
xiu1 修休羞
xiu4 秀绣袖锈嗅
xu1 需须虚吁嘘墟
xu2 徐
xu3 许栩
xu4 续序绪叙蓄酗絮婿
xuan1 宣喧
xuan2 悬旋玄
xuan3 选
xuan4 炫绚
xue1 靴薛
xue2 学穴
xue3 雪
xue4 血
xun1 熏勋
xun2 寻巡询循旬
xun4 训迅讯汛逊驯
ya1 压鸭押丫
ya2 牙芽涯崖
ya3 雅哑
ya4 亚
ya5 呀
yan1 烟淹焉
yan2 言严研沿盐颜岩炎延蜒阎
yan3 眼演掩衍
yan4 验燕宴艳雁厌焰
yang1 央秧殃
yang2 阳羊洋扬杨
yang3 养氧仰痒
yang4 样漾
yao1 腰邀妖夭
yao2 摇遥窑谣姚
yao3 咬
yao4 药要耀钥
ye1 椰噎
ye2 爷耶
ye3 也野冶
ye4 页夜业液叶
yi1 一衣医依伊壹
yi2 姨移疑遗仪宜夷胰
yi3 以已椅乙蚁倚
yi4 意义议易亿忆艺异益译翼疫役抑毅溢谊逸
yin1 因音阴姻殷
yin2 银吟
yin3 引饮隐瘾
yin4 印
ying1 应英鹰樱婴鹦
ying2 赢迎营蝇盈荧
ying3 影
ying4 硬映
yong1 拥庸
yong3 永勇泳涌咏踊
yong4 用
you1 优忧悠幽
you2 由游油邮尤犹铀
you3 有友
you4 又右幼诱
yu1 迂淤
yu2 于鱼余愉娱渔愚榆舆逾渝
yu3 与雨语宇羽屿
yu4 玉遇欲育狱浴预域郁寓裕愈誉
yuan1 冤鸳渊
yuan2 元员园原圆缘源援猿袁
yuan3 远
yuan4 院愿怨苑
yue1 约
yue4 月越阅悦跃岳粤
yun1 晕
yun2 云匀
yun3 允陨
yun4 运韵孕酝蕴
za2 杂砸
zai1 灾栽
zai3 宰
zai4 在再载
zan2 咱
zan3 攒
zan4 赞暂
zang1 脏
zang4 葬
zao1 遭糟
zao2 凿
zao3 早澡枣蚤
zao4 造燥灶躁皂噪
ze2 则责择泽
zei2 贼
zen3 怎
zeng1 增憎
zeng4 赠
zha1 扎渣喳
zha2 闸
zha3 眨
zha4 炸诈榨乍
zhai1 摘斋
zhai2 宅
zhai3 窄
zhai4 债寨
zhan1 粘沾瞻毡
zhan3 展斩崭盏
zhan4 战站占绽栈
zhang1 张章彰樟
zhang3 涨掌
zhang4 丈帐障胀账杖仗
zhao1 招昭
zhao3 找沼
zhao4 照召兆罩赵
zhe1 遮
zhe2 折哲辙
zhe3 者
zhe4 这浙蔗
zhe5 着
zhen1 真针珍侦斟贞
zhen3 诊枕
zhen4 阵镇振震
zheng1 争征睁蒸筝
zheng3 整拯
zheng4 正政证郑挣症
zhi1 之支知织枝汁芝肢蜘脂
zhi2 直值职植殖执侄
zhi3 只指止纸址旨趾
zhi4 制至志治置智质致秩稚滞帜掷窒
zhong1 中钟终忠衷
zhong3 种肿
zhong4 重众仲
zhou1 周州舟洲粥
zhou2 轴
zhou4 皱宙昼骤咒
zhu1 猪珠朱株诸蛛
zhu2 竹逐烛
zhu3 主煮嘱瞩拄
zhu4 住注助祝著筑铸驻柱蛀贮
zhua1 抓
zhuai4 拽
zhuan1 专砖
zhuan3 转
zhuan4 赚撰
zhuang1 装庄桩妆
zhuang4 状壮撞
zhui1 追锥
zhui4 坠缀赘
zhun3 准
zhuo1 桌捉拙
zhuo2 浊酌啄
zi1 资姿滋咨
zi3 紫籽子
zi4 自字
zong1 宗综踪棕
zong3 总
zong4 纵粽
zou3 走
zou4 奏揍
zu1 租
zu2 足族卒
zu3 组阻祖
zuan1 钻
zui3 嘴
zui4 最罪醉
zun1 尊遵
zuo2 昨
zuo3 左佐
zuo4 做作坐座
"""

SYLLABLE_RE = re.compile(r"^[a-z]+[1-5]$")


def decompose(syllable):
    letters = syllable[:-1]
    best = ""
    for ini in INITIALS:
        if letters.startswith(ini) and len(ini) > len(best):
            best = ini
    return best, letters[len(best):]


I_GROUP = {"i", "ia", "ian", "iang", "iao", "ie", "in", "ing", "iong", "iu"}
U_GROUP = {"u", "ua", "uai", "uan", "uang", "ui", "un", "uo"}
V_GROUP = {"v", "ve"}


def plausible(initial, final):
    """Mandarin phonotactics; used only to catch table typos."""
    if initial in {"b", "p", "m", "f"}:
        # labials take no u-medial finals except bare u, and no v-finals
        return final not in (U_GROUP - {"u"}) and final not in V_GROUP and final != "iong"
    if initial in {"d", "t"}:
        return final not in V_GROUP and final not in {"ia", "iang", "iong", "in"} | {"ua", "uai", "uang"}
    if initial == "n":
        return final not in {"ia", "iong", "ua", "uai", "uang"}
    if initial == "l":
        return final not in {"iong", "ua", "uai", "uang"} # lia (as in 俩) exists
    if initial in {"g", "k", "h"}:
        return final not in I_GROUP and final not in V_GROUP
    if initial in {"j", "q", "x"}:
        # written u after j/q/x is the v sound; bare a/o/e/ai/... do not occur
        return final in I_GROUP or final in {"u", "uan", "un", "ue"}
    if initial in {"zh", "ch", "sh", "r", "z", "c", "s"}:
        return final not in (I_GROUP - {"i"}) and final not in V_GROUP
    if initial == "y":
        return final in {"a", "an", "ang", "ao", "e", "i", "in", "ing", "o", "ong", "ou", "u",
                         "uan", "un", "ue"}
    if initial == "w":
        return final in {"a", "ai", "an", "ang", "ei", "en", "eng", "o", "u"}
    if initial == "":
        return final in {"a", "ai", "an", "ang", "ao", "e", "ei", "en", "er", "o", "ou"}
    return True


def parse_table():
    entries = {}
    syllables = set()
    errors = []
    for raw in SYLLABLE_CHARS.strip().splitlines():
        syl, _, chars = raw.partition(" ")
        if not SYLLABLE_RE.match(syl):
            errors.append(f"bad syllable token: {raw!r}")
            continue
        if not chars:
            errors.append(f"no characters for {syl}")
            continue
        initial, final = decompose(syl)
        if not final:
            errors.append(f"{syl}: empty final after initial match")
        elif not plausible(initial, final):
            errors.append(f"{syl}: implausible initial/final combination {initial!r}+{final!r}")
        syllables.add(syl)
        for ch in chars:
            if not 0x4E00 <= ord(ch) <= 0x9FFF:
                errors.append(f"{syl}: {ch!r} is not a CJK ideograph")
                continue
            if ch in entries:
                errors.append(f"duplicate character {ch}: {entries[ch]} vs {syl}")
                continue
            entries[ch] = syl
    return entries, syllables, errors


def check_corpus(entries, corpus_dir):
    missing = collections.Counter()
    if not corpus_dir.is_dir():
        return missing
    for path in sorted(corpus_dir.glob("*.txt")):
        for ch in path.read_text(encoding="utf-8"):
            if 0x4E00 <= ord(ch) <= 0x9FFF and ch not in entries:
                missing[ch] += 1
    return missing


def main():
    root = pathlib.Path(__file__).resolve().parent.parent
    data = root / "data"
    data.mkdir(exist_ok=True)

    entries, syllables, errors = parse_table()
    if errors:
        for e in errors:
            print("ERROR:", e, file=sys.stderr)
        return 1

    finals = sorted({decompose(s)[1] for s in syllables})

    with open(data / "char_pinyin.tsv", "w", encoding="utf-8") as f:
        for ch in sorted(entries):
            f.write(f"{ch}\t{entries[ch]}\n")
    with open(data / "initials.txt", "w", encoding="utf-8") as f:
        f.write("\n".join(INITIALS) + "\n")
    with open(data / "finals.txt", "w", encoding="utf-8") as f:
        f.write("\n".join(finals) + "\n")

    # Demo confusion set: characters sharing the toneless base syllable.
    base_groups = collections.defaultdict(list)
    for ch in sorted(entries):
        base_groups[entries[ch][:-1]].append(ch)
    with open(data / "confusions.tsv", "w", encoding="utf-8") as f:
        for base in sorted(base_groups):
            group = base_groups[base]
            if len(group) < 2:
                continue
            for ch in group:
                others = [c for c in group if c != ch][:6]
                f.write(f"{ch}\t{''.join(others)}\n")

    missing = check_corpus(entries, data / "sample_corpus")
    for ch, n in missing.most_common():
        print(f"CORPUS MISS: {ch} (x{n})", file=sys.stderr)

    print(f"characters: {len(entries)}")
    print(f"distinct toned syllables: {len(syllables)}")
    print(f"finals: {len(finals)}")
    if len(syllables) < 430:
        print("ERROR: fewer than 430 distinct syllables", file=sys.stderr)
        return 1
    return 1 if missing else 0


if __name__ == "__main__":
    sys.exit(main())
