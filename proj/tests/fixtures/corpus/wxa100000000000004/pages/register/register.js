Page({
  data: { date: '' },

  onDate(e) {
    this.setData({ date: e.detail.value });
  },

  onSubmit(e) {
    const form = e.detail.value;
    wx.showLoading({ title: 'Submitting' });
    wx.request({
      url: 'https://clinic.renmin.example.com/api/appointments',
      method: 'POST',
      data: form,
      complete: () => wx.hideLoading(),
    });
  },
});
