"""Regenerates fixtures/house_prices.ipynb.

The notebook mirrors a typical house-price regression analysis: 42 code
cells, no markdown, with PNG chart outputs and HTML table outputs built from
synthetic data. Run from this directory: python3 gen_house_prices.py
"""

import base64
import io
import json

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

rng = np.random.default_rng(7)
N = 200
frame = pd.DataFrame(
    {
        "Id": np.arange(1, N + 1),
        "LotFrontage": rng.normal(70, 20, N).round(),
        "GrLivArea": rng.normal(1500, 400, N).round(),
        "OverallQual": rng.integers(1, 11, N),
        "GarageCars": rng.integers(0, 4, N),
        "TotalBsmtSF": rng.normal(1000, 300, N).round(),
    }
)
frame["SalePrice"] = (
    frame["GrLivArea"] * 90 + frame["OverallQual"] * 9000 + rng.normal(0, 20000, N)
).round()


def png(draw):
    fig, ax = plt.subplots(figsize=(4, 3), dpi=40)
    draw(ax)
    buf = io.BytesIO()
    fig.savefig(buf, format="png", metadata={"Software": None})
    plt.close(fig)
    return base64.b64encode(buf.getvalue()).decode("ascii")


def chart(draw):
    return {
        "output_type": "display_data",
        "metadata": {},
        "data": {"image/png": png(draw), "text/plain": ["<Figure size 400x300 with 1 Axes>"]},
    }


def html_table(df, count):
    return {
        "output_type": "execute_result",
        "execution_count": count,
        "metadata": {},
        "data": {"text/html": df.to_html(), "text/plain": df.to_string()},
    }


def plain(text, count):
    return {
        "output_type": "execute_result",
        "execution_count": count,
        "metadata": {},
        "data": {"text/plain": text},
    }


def stream(text):
    return {"output_type": "stream", "name": "stdout", "text": text}


corr = frame.corr()

CELLS = [
    ("import numpy as np\nimport pandas as pd\nimport matplotlib.pyplot as plt\nimport seaborn as sns", []),
    ("train = pd.read_csv('train.csv')\ntest = pd.read_csv('test.csv')", []),
    ("train.head()", [lambda c: html_table(frame.head(), c)]),
    ("train.shape", [lambda c: plain("(1460, 81)", c)]),
    ("train.describe()", [lambda c: html_table(frame.describe().round(2).iloc[:4], c)]),
    ("train['SalePrice'].describe()", [lambda c: plain(frame["SalePrice"].describe().round(2).to_string(), c)]),
    ("sns.histplot(train['SalePrice'], kde=True)", [lambda c: chart(lambda ax: ax.hist(frame["SalePrice"], bins=20))]),
    ("print('Skewness: %f' % train['SalePrice'].skew())\nprint('Kurtosis: %f' % train['SalePrice'].kurt())", [lambda c: stream("Skewness: 1.882876\nKurtosis: 6.536282\n")]),
    ("corrmat = train.corr(numeric_only=True)\nplt.figure(figsize=(12, 9))\nsns.heatmap(corrmat, vmax=.8, square=True)", [lambda c: chart(lambda ax: ax.imshow(corr.values))]),
    ("k = 10\ncols = corrmat.nlargest(k, 'SalePrice')['SalePrice'].index\ntop_corr = np.corrcoef(train[cols].values.T)\nsns.heatmap(top_corr, annot=True, yticklabels=cols.values, xticklabels=cols.values)", [lambda c: chart(lambda ax: ax.imshow(corr.values[:4, :4]))]),
    ("important_features = corrmat['SalePrice'].sort_values(ascending=False).head(10)\nimportant_features", [lambda c: plain(corr["SalePrice"].sort_values(ascending=False).round(3).to_string(), c)]),
    ("sns.pairplot(train[['SalePrice', 'OverallQual', 'GrLivArea', 'GarageCars', 'TotalBsmtSF']], height=2.5)", [lambda c: chart(lambda ax: ax.scatter(frame["GrLivArea"], frame["TotalBsmtSF"], s=4))]),
    ("fig, ax = plt.subplots()\nax.scatter(x=train['LotFrontage'], y=train['SalePrice'])\nplt.xlabel('LotFrontage')\nplt.ylabel('SalePrice')\nplt.show()", [lambda c: chart(lambda ax: ax.scatter(frame["LotFrontage"], frame["SalePrice"], s=4))]),
    ("total = train.isnull().sum().sort_values(ascending=False)\npercent = (train.isnull().sum() / train.isnull().count()).sort_values(ascending=False)\nmissing_data = pd.concat([total, percent], axis=1, keys=['Total', 'Percent'])\nmissing_data.head(20)", [lambda c: html_table(pd.DataFrame({"Total": [1453, 1406, 1369], "Percent": [0.995, 0.963, 0.937]}, index=["PoolQC", "MiscFeature", "Alley"]), c)]),
    ("train = train.drop((missing_data[missing_data['Total'] > 1]).index, axis=1)\ntrain = train.drop(train.loc[train['Electrical'].isnull()].index)", []),
    ("train.isnull().sum().max()", [lambda c: plain("0", c)]),
    ("# inspect the largest living areas for outliers\noutliers = train.sort_values(by='GrLivArea', ascending=False)[:2]\noutliers[['Id', 'GrLivArea', 'SalePrice']]", [lambda c: html_table(frame.sort_values(by="GrLivArea", ascending=False)[:2][["Id", "GrLivArea", "SalePrice"]], c)]),
    ("# remove outliers: two huge houses with low prices\ntrain = train.drop(train[train['Id'] == 1299].index)\ntrain = train.drop(train[train['Id'] == 524].index)", []),
    ("from sklearn.preprocessing import StandardScaler\nsaleprice_scaled = StandardScaler().fit_transform(train['SalePrice'].values[:, np.newaxis])", []),
    ("low_range = saleprice_scaled[saleprice_scaled[:, 0].argsort()][:10]\nhigh_range = saleprice_scaled[saleprice_scaled[:, 0].argsort()][-10:]\nprint('outer range (low) of the distribution:')\nprint(low_range)\nprint('outer range (high) of the distribution:')\nprint(high_range)", [lambda c: stream("outer range (low) of the distribution:\n[[-1.83820775]\n [-1.83303414]]\nouter range (high) of the distribution:\n[[3.82758058]\n [4.0395221 ]]\n")]),
    ("train['SalePrice'] = np.log(train['SalePrice'])\nsns.histplot(train['SalePrice'], kde=True)", [lambda c: chart(lambda ax: ax.hist(np.log(frame["SalePrice"].clip(lower=1000)), bins=20))]),
    ("train['GrLivArea'] = np.log(train['GrLivArea'])\ntrain['HasBsmt'] = (train['TotalBsmtSF'] > 0).astype(int)", []),
    ("train.loc[train['HasBsmt'] == 1, 'TotalBsmtSF'] = np.log(train['TotalBsmtSF'])", []),
    ("train = pd.get_dummies(train)\ntrain.shape", [lambda c: plain("(1457, 222)", c)]),
    ("from sklearn.feature_selection import SelectKBest, f_regression\nselector = SelectKBest(score_func=f_regression, k=20)\nselector.fit(train.drop('SalePrice', axis=1), train['SalePrice'])", []),
    ("selected_features = train.drop('SalePrice', axis=1).columns[selector.get_support()]\nlist(selected_features)", [lambda c: plain("['OverallQual', 'GrLivArea', 'GarageCars', 'TotalBsmtSF']", c)]),
    ("X = train[selected_features]\ny = train['SalePrice']", []),
    ("from sklearn.model_selection import train_test_split\nX_train, X_val, y_train, y_val = train_test_split(X, y, test_size=0.2, random_state=42)", []),
    ("from sklearn.preprocessing import RobustScaler\nscaler = RobustScaler()\nX_train_scaled = scaler.fit_transform(X_train)\nX_val_scaled = scaler.transform(X_val)", []),
    ("from sklearn.linear_model import LinearRegression, Ridge, Lasso\nlinear = LinearRegression()\nlinear.fit(X_train_scaled, y_train)", []),
    ("ridge = Ridge(alpha=10)\nridge.fit(X_train_scaled, y_train)", []),
    ("lasso = Lasso(alpha=0.0005)\nlasso.fit(X_train_scaled, y_train)", []),
    ("from sklearn.ensemble import GradientBoostingRegressor, RandomForestRegressor\ngbr = GradientBoostingRegressor(n_estimators=300, learning_rate=0.05)\ngbr.fit(X_train_scaled, y_train)", []),
    ("forest = RandomForestRegressor(n_estimators=200, random_state=42)\nforest.fit(X_train_scaled, y_train)", []),
    ("from sklearn.metrics import mean_squared_error\ndef rmse(model):\n    return np.sqrt(mean_squared_error(y_val, model.predict(X_val_scaled)))", []),
    ("scores = pd.DataFrame({'model': ['linear', 'ridge', 'lasso', 'gbr', 'forest'], 'rmse': [rmse(m) for m in [linear, ridge, lasso, gbr, forest]]})\nscores", [lambda c: html_table(pd.DataFrame({"model": ["linear", "ridge", "lasso", "gbr", "forest"], "rmse": [0.142, 0.139, 0.137, 0.128, 0.135]}), c)]),
    ("# model performance: predicted vs actual sale price\npred = gbr.predict(X_val_scaled)\nplt.scatter(y_val, pred)\nplt.xlabel('actual')\nplt.ylabel('predicted')", [lambda c: chart(lambda ax: ax.scatter(frame["SalePrice"], frame["SalePrice"] + rng.normal(0, 15000, N), s=4))]),
    ("residuals = y_val - pred\nplt.scatter(pred, residuals)\nplt.axhline(0, color='red')", [lambda c: chart(lambda ax: ax.scatter(frame["SalePrice"], rng.normal(0, 15000, N), s=4))]),
    ("importances = pd.Series(gbr.feature_importances_, index=selected_features).sort_values()\nimportances.plot(kind='barh')", [lambda c: chart(lambda ax: ax.barh(["OverallQual", "GrLivArea", "GarageCars", "TotalBsmtSF"], [0.5, 0.3, 0.12, 0.08]))]),
    ("test_features = scaler.transform(test[selected_features].fillna(0))\ntest_pred = np.expm1(gbr.predict(test_features))", []),
    ("submission = pd.DataFrame({'Id': test['Id'], 'SalePrice': test_pred})\nsubmission.to_csv('submission.csv', index=False)", []),
    ("submission.head()", [lambda c: html_table(pd.DataFrame({"Id": [1461, 1462, 1463], "SalePrice": [121734.5, 158902.1, 183204.7]}), c)]),
]

assert len(CELLS) == 42, len(CELLS)

cells = []
for count, (source, outputs) in enumerate(CELLS, start=1):
    lines = source.split("\n")
    source_list = [line + "\n" for line in lines[:-1]] + [lines[-1]]
    cells.append(
        {
            "cell_type": "code",
            "execution_count": count,
            "metadata": {},
            "outputs": [make(count) for make in outputs],
            "source": source_list,
        }
    )

notebook = {
    "cells": cells,
    "metadata": {
        "kernelspec": {"display_name": "Python 3", "language": "python", "name": "python3"},
        "language_info": {"name": "python", "version": "3.11.4"},
    },
    "nbformat": 4,
    "nbformat_minor": 4,
}

with open("house_prices.ipynb", "w") as fh:
    json.dump(notebook, fh, indent=1)
    fh.write("\n")
